"""Flat ``section.key = value`` configuration with typed defaults.

Lines starting with ``#`` and blank lines are ignored.  Every key must be
listed in :data:`DEFAULTS`; anything else is rejected so a typo cannot
silently fall back to a default.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

from .errors import ConfigError

__all__ = ["DEFAULTS", "SCENARIO_DEFAULTS", "parse_text", "load_config", "Config", "parse_field"]

KINDS = (
    "bo-conservation",
    "exp-bound",
    "ilw-limit",
    "gauge-check",
    "symbol-audit",
    "isospectral",
    "tightness",
)

# key -> (type, default)
DEFAULTS: dict[str, tuple[type, object]] = {
    "scenario.kind": (str, "bo-conservation"),
    "solver.N": (int, 128),
    "solver.dt": (float, 1e-3),
    "solver.T": (float, 1.0),
    "solver.dealias_fraction": (float, 2.0 / 3.0),
    "solver.sample_every": (int, 50),
    "solver.nonlinearity": (bool, True),
    "solver.scheme": (str, "etdrk4"),
    "symbol.kind": (str, "zero"),
    "symbol.delta": (float, 1.0),
    "symbol.gamma": (float, -1.0),
    "symbol.table": (str, ""),
    "data.kind": (str, "trig"),
    "data.u0": (str, "2*cos(x) + 0.5*sin(2*x)"),
    "data.s": (float, -0.25),
    "data.scale": (float, 1.0),
    "data.mean": (float, 0.0),
    "data.path": (str, ""),
    "beta.kappa": (float, 8.0),
    "beta.s": (float, -0.25),
    "beta.M": (int, 0),
    "beta.rtol": (float, 1e-8),
    "beta.with_beta_s": (bool, True),
    "ladder.deltas": (str, "2,4,8,16"),
    "ladder.norm_s": (float, -0.25),
    "tightness.count": (int, 0),
    "isospectral.count": (int, 8),
    "tol.beta_drift": (float, 1e-6),
    "tol.mean_drift": (float, 1e-12),
    "tol.self_check": (float, 1e-6),
    "tol.kfit_stability": (float, 0.10),
    "tol.kfit_max": (float, math.inf),
    "tol.order": (float, 1.8),
    "tol.gauge": (float, 1e-8),
    "tol.eig_drift": (float, 1e-4),
    "tol.omega_drift": (float, 1e-3),
    "tol.tail_fraction": (float, 0.01),
    "tol.symmetry_order": (float, 1.9),
}

# per-scenario defaults applied beneath the user's file and overrides
SCENARIO_DEFAULTS: dict[str, dict[str, str]] = {
    "exp-bound": {"symbol.kind": "ilw-boosted", "solver.N": "64", "solver.sample_every": "100"},
    "ilw-limit": {"solver.N": "64", "solver.T": "0.5", "solver.sample_every": "50",
                  "data.u0": "cos(x) + 0.25*sin(2*x)"},
    "tightness": {"solver.N": "64", "solver.T": "0.5", "solver.sample_every": "100",
                  "ladder.deltas": "1,2,4,8,16",
                  "data.u0": "cos(x) + 0.25*sin(2*x)"},
    "gauge-check": {"symbol.kind": "rayleigh", "symbol.gamma": "1.0", "solver.T": "0.5",
                    "solver.dt": "5e-4", "data.mean": "0.5", "data.u0": "cos(x) + 0.25*sin(2*x)"},
}


def _convert(key: str, raw: str):
    typ, _ = DEFAULTS[key]
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot read {raw!r} as {typ.__name__}") from exc


def parse_text(text: str, origin: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


class Config(dict):
    """Fully resolved, typed settings keyed by dotted names."""

    def section(self, name: str) -> dict:
        prefix = name + "."
        return {k[len(prefix):]: v for k, v in self.items() if k.startswith(prefix)}

    def echo(self) -> dict:
        return {k: (v if not (isinstance(v, float) and math.isinf(v)) else "inf")
                for k, v in sorted(self.items())}


def load_config(path=None, overrides=(), kind: str | None = None) -> Config:
    """Resolve defaults, scenario defaults, file contents and ``key=value`` overrides."""
    layers: list[dict[str, str]] = []
    file_layer = parse_text(Path(path).read_text(), str(path)) if path else {}
    override_layer = parse_text("\n".join(overrides), "--override")
    kinds = kind or override_layer.get("scenario.kind") or file_layer.get("scenario.kind")
    for k in (kinds or "").split(","):
        k = k.strip()
        if k and k not in KINDS:
            raise ConfigError(f"unknown scenario kind {k!r}; choose from {KINDS}")
        layers.append(SCENARIO_DEFAULTS.get(k, {}))
    layers += [file_layer, override_layer]
    cfg = Config({k: d for k, (_, d) in DEFAULTS.items()})
    for layer in layers:
        for k, v in layer.items():
            cfg[k] = _convert(k, v)
    if kind:
        cfg["scenario.kind"] = kind
    _validate(cfg)
    return cfg


def _validate(cfg: Config) -> None:
    if cfg["solver.N"] < 1:
        raise ConfigError("solver.N must be >= 1")
    if not cfg["solver.dt"] > 0:
        raise ConfigError("solver.dt must be positive")
    if cfg["solver.T"] < 0:
        raise ConfigError("solver.T must be >= 0")
    if not 0 < cfg["solver.dealias_fraction"] <= 1:
        raise ConfigError("solver.dealias_fraction must lie in (0, 1]")
    if not -0.5 < cfg["beta.s"] < 0:
        raise ConfigError("beta.s must lie in (-1/2, 0)")
    if not -0.5 < cfg["ladder.norm_s"] < 0:
        raise ConfigError("ladder.norm_s must lie in (-1/2, 0)")
    if cfg["beta.kappa"] < 1:
        raise ConfigError("beta.kappa must be >= 1")
    if cfg["symbol.kind"] not in ("zero", "ilw-full", "ilw-boosted", "smith", "rayleigh", "table"):
        raise ConfigError(f"unknown symbol.kind {cfg['symbol.kind']!r}")
    if cfg["symbol.kind"] == "table" and not cfg["symbol.table"]:
        raise ConfigError("symbol.kind=table needs symbol.table")
    if cfg["data.kind"] not in ("trig", "rough", "snapshot"):
        raise ConfigError(f"unknown data.kind {cfg['data.kind']!r}")
    if cfg["data.kind"] == "snapshot" and not cfg["data.path"]:
        raise ConfigError("data.kind=snapshot needs data.path")
    for k in cfg["scenario.kind"].split(","):
        if k.strip() not in KINDS:
            raise ConfigError(f"unknown scenario kind {k!r}")
    try:
        deltas = [float(d) for d in cfg["ladder.deltas"].split(",")]
    except ValueError as exc:
        raise ConfigError("ladder.deltas must be comma-separated numbers") from exc
    if not deltas or any(d <= 0 for d in deltas):
        raise ConfigError("ladder.deltas must be positive")
    parse_field(cfg["data.u0"])


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<amp>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)\s*\*?\s*)?
        (?:(?P<fn>cos|sin)\(\s*(?:(?P<k>\d+)\s*\*?\s*)?x\s*\))?\s*""",
    re.VERBOSE,
)


def parse_field(expr: str) -> dict[int, complex]:
    """``{n: u_hat(n)}`` for a sum of ``a*cos(k*x)``, ``a*sin(k*x)`` and constants."""
    modes: dict[int, complex] = {}
    pos = 0
    expr = expr.strip()
    if not expr:
        raise ConfigError("empty field expression")
    while pos < len(expr):
        m = _TERM.match(expr, pos)
        if not m or m.end() == pos or (m.group("amp") is None and m.group("fn") is None):
            raise ConfigError(f"cannot parse field expression at {expr[pos:]!r}")
        pos = m.end()
        amp = float(m.group("amp")) if m.group("amp") else 1.0
        if m.group("sign") == "-":
            amp = -amp
        fn = m.group("fn")
        k = int(m.group("k")) if m.group("k") else 1
        if fn is None:
            modes[0] = modes.get(0, 0) + amp
        elif k == 0:
            modes[0] = modes.get(0, 0) + (amp if fn == "cos" else 0.0)
        elif fn == "cos":
            modes[k] = modes.get(k, 0) + amp / 2
        else:
            modes[k] = modes.get(k, 0) - 0.5j * amp
    return modes
