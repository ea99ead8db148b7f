import math

import pytest

from bopert.config import DEFAULTS, KINDS, load_config, parse_field, parse_text
from bopert.errors import ConfigError


def test_defaults_complete():
    cfg = load_config()
    assert set(cfg) == set(DEFAULTS)
    assert cfg["solver.N"] == 128 and cfg["solver.dt"] == 1e-3
    assert math.isinf(cfg["tol.kfit_max"])
    assert cfg.echo()["tol.kfit_max"] == "inf"


def test_layering(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\n\nsolver.N = 32\nsolver.T=0.25\n")
    cfg = load_config(path, ["solver.T=0.5"], kind="ilw-limit")
    assert cfg["solver.N"] == 32  # file beats scenario default
    assert cfg["solver.T"] == 0.5  # override beats file
    assert cfg["scenario.kind"] == "ilw-limit"
    assert cfg.section("solver")["N"] == 32


def test_scenario_defaults():
    assert load_config(kind="gauge-check")["symbol.kind"] == "rayleigh"
    assert load_config(kind="exp-bound")["solver.N"] == 64


@pytest.mark.parametrize(
    "text",
    ["solver.Nn=3", "solver.N", "solver.N=abc", "solver.nonlinearity=maybe"],
)
def test_bad_text(text):
    with pytest.raises(ConfigError):
        load_config(overrides=[text])


@pytest.mark.parametrize(
    "override",
    ["solver.N=0", "solver.dt=0", "solver.T=-1", "solver.dealias_fraction=0", "beta.s=-0.5",
     "beta.s=0.1", "beta.kappa=0.5", "symbol.kind=foo", "symbol.kind=table", "data.kind=foo",
     "data.kind=snapshot", "scenario.kind=nope", "ladder.deltas=2,x", "ladder.deltas=-1",
     "data.u0=tan(x)", "ladder.norm_s=-0.7"],
)
def test_validation(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[override])


def test_kind_argument_checked():
    with pytest.raises(ConfigError):
        load_config(kind="bogus")
    assert set(KINDS) >= {"bo-conservation", "tightness"}


def test_parse_text():
    assert parse_text("solver.N = 7\n# c\n") == {"solver.N": "7"}


@pytest.mark.parametrize(
    "expr,modes",
    [
        ("2*cos(x) + 0.5*sin(2*x)", {1: 1.0, 2: -0.25j}),
        ("cos(x)", {1: 0.5}),
        ("-sin(3x)", {3: 0.5j}),
        ("0.5 + cos(x) - 2*cos(x)", {0: 0.5, 1: -0.5}),
        ("1e-1*cos(2*x)", {2: 0.05}),
        ("3", {0: 3.0}),
    ],
)
def test_parse_field(expr, modes):
    got = parse_field(expr)
    assert got.keys() == modes.keys()
    for k in modes:
        assert abs(got[k] - modes[k]) < 1e-15


@pytest.mark.parametrize("expr", ["", "cos(y)", "2**x", "cos(x) +"])
def test_parse_field_errors(expr):
    with pytest.raises(ConfigError):
        parse_field(expr)
