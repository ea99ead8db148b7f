"""Order-zero Fourier multipliers ``A`` acting as ``(Af)^(n) = a(n) f_hat(n)``.

Every symbol here must satisfy ``a(-n) = conj(a(n))`` so that ``A`` maps real
fields to real fields.  The full ILW symbol carries the unbounded drift
``-i n / delta`` and is flagged ``claims_bounded=False``; it becomes bounded
after moving to the co-moving frame (see :func:`ilw_boosted_symbol`).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import FormatError, NonpositiveDepth

log = logging.getLogger(__name__)

__all__ = [
    "MultiplierSymbol",
    "ilw_full_symbol",
    "ilw_boosted_symbol",
    "smith_symbol",
    "rayleigh_symbol",
    "zero_symbol",
    "table_symbol",
    "load_symbol_table",
    "check_real_symmetry",
    "sup_norm",
]

# exp(700) is close to the float64 ceiling; beyond it the correction is < 1e-300
_EXP_GUARD = 700.0


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    params: dict = field(default_factory=dict)
    claims_bounded: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def eval(self, n) -> np.ndarray:
        """Evaluate ``a(n)`` on an integer array (vectorized)."""
        n = np.asarray(n, dtype=np.int64)
        return np.asarray(self.func(n), dtype=np.complex128) + np.zeros(n.shape)

    def __call__(self, n):
        out = self.eval(n)
        return complex(out) if out.ndim == 0 else out

    def band(self, N: int) -> np.ndarray:
        """``a(0..N)``, memoized per band."""
        got = self._cache.get(N)
        if got is None:
            got = self.eval(np.arange(N + 1))
            got.setflags(write=False)
            self._cache[N] = got
        return got

    @property
    def a0(self) -> float:
        return float(self.eval(0).real)

    def describe(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def _check_depth(delta: float) -> float:
    delta = float(delta)
    if not delta > 0.0:
        raise NonpositiveDepth(f"depth must be positive, got {delta}")
    return delta


def _ilw_correction(n: np.ndarray, delta: float) -> np.ndarray:
    """``2 i n |n| / (exp(2|delta n|) - 1)`` with the overflow guard."""
    nf = n.astype(np.float64)
    x = 2.0 * np.abs(delta * nf)
    out = np.zeros(n.shape, dtype=np.complex128)
    live = (n != 0) & (x <= _EXP_GUARD)
    out[live] = 2j * nf[live] * np.abs(nf[live]) / np.expm1(x[live])
    return out


def ilw_full_symbol(delta: float) -> MultiplierSymbol:
    delta = _check_depth(delta)

    def a(n):
        return -1j * n / delta + _ilw_correction(n, delta)

    return MultiplierSymbol("ilw-full", a, {"delta": delta}, claims_bounded=False)


def ilw_boosted_symbol(delta: float) -> MultiplierSymbol:
    delta = _check_depth(delta)
    return MultiplierSymbol(
        "ilw-boosted", lambda n: _ilw_correction(n, delta), {"delta": delta}
    )


def smith_symbol() -> MultiplierSymbol:
    """Continental-shelf symbol ``i n sqrt(1+n^2) - i sgn(n) n^2``.

    Evaluated as ``i sgn(n) |n| / (sqrt(1+n^2) + |n|)`` which is algebraically
    equal and free of the cancellation in ``sqrt(1+n^2) - |n|``.
    """

    def a(n):
        nf = np.abs(n.astype(np.float64))
        return 1j * np.sign(n) * nf / (np.sqrt(1.0 + nf * nf) + nf)

    return MultiplierSymbol("smith", a)


def rayleigh_symbol(gamma: float) -> MultiplierSymbol:
    gamma = float(gamma)
    return MultiplierSymbol("rayleigh", lambda n: np.full(n.shape, gamma, dtype=np.complex128),
                            {"gamma": gamma})


def zero_symbol() -> MultiplierSymbol:
    return MultiplierSymbol("zero", lambda n: np.zeros(n.shape, dtype=np.complex128))


def table_symbol(entries, name: str = "table") -> MultiplierSymbol:
    """Symbol from explicit ``(n, re, im)`` rows; missing ``n`` evaluate to 0."""
    table = {int(n): complex(re, im) for n, re, im in entries}

    def a(n):
        flat = n.ravel()
        missing = sorted({int(k) for k in flat if int(k) not in table})
        if missing:
            log.warning("symbol %r: no entry for n=%s, using 0", name, missing[:8])
        out = np.array([table.get(int(k), 0j) for k in flat], dtype=np.complex128)
        return out.reshape(n.shape)

    return MultiplierSymbol(name, a, {"entries": len(table)})


def load_symbol_table(path) -> MultiplierSymbol:
    """Read ``{"entries": [[n, re, im], ...]}`` from ``path``."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
        return table_symbol(doc["entries"], name=path.stem)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: not a symbol table ({exc})") from exc


def check_real_symmetry(sym: MultiplierSymbol, n_max: int) -> bool:
    n = np.arange(1, n_max + 1)
    pos = sym.eval(n)
    neg = sym.eval(-n)
    return bool(np.all(np.abs(neg - np.conj(pos)) <= 1e-14 * (1.0 + np.abs(pos))))


def sup_norm(sym: MultiplierSymbol, n_max: int) -> float:
    n = np.arange(-n_max, n_max + 1)
    return float(np.max(np.abs(sym.eval(n))))
