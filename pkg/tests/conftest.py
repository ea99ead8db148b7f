import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one summary line per acceptance criterion."""

    def record(number, title, measured, op, tol, passed, extra=""):
        tag = "PASS" if passed else "FAIL"
        line = f"{tag}  criterion {number:>2} {title}: measured={measured} {op} tol={tol}"
        if extra:
            line += f"  [{extra}]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
