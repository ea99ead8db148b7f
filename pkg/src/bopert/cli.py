"""Command line entry point ``bopert``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import BOPertError
from .runner import (
    RunRecord,
    Scenario,
    Verdict,
    beta_profile_table,
    emit_report,
    merge_records,
    run_evolve,
    run_scenario,
)

# subcommand -> scenario kinds it runs by default
COMMANDS = {
    "beta": ("bo-conservation", "exp-bound", "isospectral"),
    "converge": ("ilw-limit", "tightness"),
    "gauge-check": ("gauge-check",),
    "symbol-audit": ("symbol-audit",),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bopert", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("evolve", *COMMANDS, "report"):
        sp = sub.add_parser(name)
        sp.add_argument("--out", type=Path, default=Path("bopert-out"))
        if name == "report":
            continue
        sp.add_argument("--config", type=Path)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
        if name in COMMANDS:
            sp.add_argument("--kind", help="comma-separated scenario kinds (default: %s)"
                            % ",".join(COMMANDS[name]))
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _print(rec: RunRecord) -> None:
    for v in rec.verdicts:
        print(v.line())
    print(f"{'PASS' if rec.passed else 'FAIL'}  {rec.kind}")


def _report(out: Path) -> int:
    path = out / "manifest.json"
    try:
        manifest = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return 2
    ok = True
    for name, fname in manifest.get("tables", {}).items():
        if not (out / fname).is_file():
            print(f"FAIL  table {name}: {fname} missing")
            ok = False
    for v in manifest.get("verdicts", []):
        measured, tol = float(v["measured"]), float(v["tolerance"])
        print(Verdict(v["name"], v["passed"], measured, tol, v["op"], v["detail"]).line())
        ok &= bool(v["passed"])
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "report":
        return _report(args.out)
    try:
        if args.command == "evolve":
            cfg = load_config(args.config, args.override)
            rec = run_evolve(cfg, args.seed, args.out)
        else:
            kinds = args.kind.split(",") if args.kind else list(COMMANDS[args.command])
            records = []
            for kind in kinds:
                cfg = load_config(args.config, args.override, kind=kind.strip())
                rec = run_scenario(Scenario(kind.strip(), cfg, args.seed, args.out))
                if args.command == "beta" and kind.strip() == "bo-conservation":
                    beta_profile_table(cfg, args.seed, rec)
                records.append(rec)
            rec = merge_records(records)
    except (BOPertError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    emit_report(rec, args.out)
    _print(rec)
    return 0 if rec.passed else 1


if __name__ == "__main__":
    sys.exit(main())
