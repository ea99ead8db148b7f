"""Mean-value bookkeeping for the perturbed flow.

When ``a(0) != 0`` the mean of ``u`` evolves as ``mean(t) = mean(0) e^{a(0) t}``.
The change of unknown

    v(t, x) = u(t, x - 2 d(t)) + c(t),   c' = a(0) c,  d' = c,
    c(0) = -mean(u(0)),  d(0) = 0,

yields a zero-mean solution of the same equation.  For ``a(0) = 0`` this is
the Galilei shift with ``c`` constant and ``d = c t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MeanResidual
from .spectral import TorusField, shift

__all__ = [
    "GaugeParams",
    "mean",
    "gauge_params",
    "to_zero_mean",
    "from_zero_mean",
    "boost_frame",
]

_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class GaugeParams:
    a0: float
    c0: float

    def c(self, t: float) -> float:
        return self.c0 * math.exp(self.a0 * t)

    def d(self, t: float) -> float:
        x = self.a0 * t
        if abs(x) < _SERIES_CUTOFF:
            return self.c0 * t * (1.0 + x / 2.0 + x * x / 6.0)
        return self.c0 * math.expm1(x) / self.a0

    @property
    def trivial(self) -> bool:
        return self.c0 == 0.0

    def to_dict(self) -> dict:
        return {"a0": self.a0, "c0": self.c0}

    @classmethod
    def from_dict(cls, d: dict) -> GaugeParams:
        return cls(a0=float(d["a0"]), c0=float(d["c0"]))


def mean(f: TorusField) -> float:
    return float(f.coeffs[0].real)


def gauge_params(a0: float, u0: TorusField) -> GaugeParams:
    a0 = float(np.real(a0))
    return GaugeParams(a0=a0, c0=-mean(u0))


def to_zero_mean(u_t: TorusField, t: float, gp: GaugeParams) -> TorusField:
    """``v(t) = u(t, . - 2 d(t)) + c(t)``; raises if the result is not zero-mean."""
    if gp.trivial:
        v = u_t
    else:
        v = shift(u_t, 2.0 * gp.d(t))
        c = v.coeffs.copy()
        c[0] += gp.c(t)
        v = TorusField(c)
    resid = abs(mean(v))
    if resid > 1e-10:
        raise MeanResidual(f"gauge leaves mean {resid:.3e}; parameters do not match the state")
    return v


def from_zero_mean(v_t: TorusField, t: float, gp: GaugeParams) -> TorusField:
    """Inverse of :func:`to_zero_mean`: ``u(t) = v(t, . + 2 d(t)) - c(t)``."""
    if gp.trivial:
        return v_t
    c = v_t.coeffs.copy()
    c[0] -= gp.c(t)
    return shift(TorusField(c), -2.0 * gp.d(t))


def boost_frame(u_t: TorusField, t: float, delta: float) -> TorusField:
    """Co-moving ILW frame ``v(t, x) = u(t, x + t / delta)``."""
    return shift(u_t, -t / delta)
