"""Pseudospectral integration of ``u_t = H u_xx - 2 u u_x + A u`` on the torus.

The linear generator ``L(n) = i sgn(n) n^2 + a(n)`` is diagonal and handled
exactly; the quadratic term ``-(u^2)_x`` is advanced by a fourth-order
exponential Runge-Kutta scheme.  Two schemes are available:

``"etdrk4"`` (default)
    Exponential time differencing RK4 with Krogstad's internal stages; the
    phi-function weights are evaluated by contour averaging.
``"ifrk4"``
    Integrating-factor RK4 (Lawson).  Simpler, but the dispersive phase
    mismatches enter the stepped variable and inflate the error constant by
    two to three orders of magnitude on the test problems here.

Products are formed on a grid of at least ``2N + cutoff + 1`` points, so the
retained modes ``|n| <= cutoff = dealias_fraction * N`` are alias-free for any
band-limited input; everything above the cutoff is then zeroed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft

from .errors import BlowupDetected, RealnessViolation
from .multipliers import MultiplierSymbol, zero_symbol
from .spectral import TorusField, grid_size

__all__ = [
    "SolverConfig",
    "Trajectory",
    "linear_symbol",
    "nonlinear_term",
    "evolve",
    "self_check",
    "default_dt",
    "rough_data",
]

_BLOWUP = 1e6
_CONTOUR_POINTS = 64
SCHEMES = ("etdrk4", "ifrk4")


@dataclass(frozen=True)
class SolverConfig:
    N: int = 128
    dt: float | None = None
    T: float = 1.0
    symbol: MultiplierSymbol = field(default_factory=zero_symbol)
    dealias_fraction: float = 2.0 / 3.0
    sample_every: int = 1
    nonlinearity_enabled: bool = True
    seed: int = 0
    scheme: str = "etdrk4"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias_fraction must lie in (0, 1]")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")

    @property
    def cutoff(self) -> int:
        return int(math.floor(self.dealias_fraction * self.N + 1e-12))

    def describe(self) -> dict:
        return {
            "N": self.N,
            "dt": self.dt,
            "T": self.T,
            "symbol": self.symbol.describe(),
            "dealias_fraction": self.dealias_fraction,
            "sample_every": self.sample_every,
            "nonlinearity_enabled": self.nonlinearity_enabled,
            "seed": self.seed,
            "scheme": self.scheme,
        }


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: tuple[TorusField, ...]
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", tuple(self.states))
        if t.size != len(self.states):
            raise ValueError("times and states differ in length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if len({s.N for s in self.states}) > 1:
            raise ValueError("states must share N")

    def __len__(self):
        return len(self.states)

    def coeff_array(self) -> np.ndarray:
        if not self.states:
            return np.zeros((0, 0), dtype=np.complex128)
        return np.stack([s.coeffs for s in self.states])

    def map(self, fn) -> Trajectory:
        """Apply ``fn(t, state)`` to every sample."""
        return Trajectory(self.times, [fn(t, u) for t, u in zip(self.times, self.states)], self.config)


def linear_symbol(sym: MultiplierSymbol, n) -> np.ndarray | complex:
    """``i sgn(n) n^2 + a(n)``: the symbol of ``H d_x^2 + A``."""
    n_arr = np.asarray(n, dtype=np.int64)
    out = 1j * np.sign(n_arr) * n_arr.astype(np.float64) ** 2 + sym.eval(n_arr)
    return complex(out) if out.ndim == 0 else out


class _Nonlinear:
    """``-(u^2)_x`` with zero-padded products and hard truncation."""

    def __init__(self, N: int, cutoff: int):
        self.N = N
        self.P = scipy.fft.next_fast_len(2 * N + cutoff + 1, real=True)
        self.ik = 1j * np.arange(N + 1)
        self.keep = np.arange(N + 1) <= cutoff
        self._pad = np.zeros(self.P // 2 + 1, dtype=np.complex128)

    def __call__(self, c: np.ndarray) -> np.ndarray:
        pad = self._pad
        pad[: self.N + 1] = c
        u = scipy.fft.irfft(pad, n=self.P) * self.P
        sq = scipy.fft.rfft(u * u)[: self.N + 1] / self.P
        out = -self.ik * sq
        out[~self.keep] = 0.0
        return out


def nonlinear_term(u: TorusField, dealias_fraction: float = 2.0 / 3.0) -> TorusField:
    cutoff = int(math.floor(dealias_fraction * u.N + 1e-12))
    return TorusField(_Nonlinear(u.N, cutoff)(u.coeffs))


def _phi(z: np.ndarray):
    """``phi_1, phi_2, phi_3`` at ``z``, averaged over a unit circle around ``z``.

    The contour mean is exact for these entire functions up to a spectrally
    small trapezoid error and avoids the cancellation near ``z = 0``.
    """
    r = z[:, None] + np.exp(2j * np.pi * (np.arange(_CONTOUR_POINTS) + 0.5) / _CONTOUR_POINTS)
    em1 = np.expm1(r)
    p1 = np.mean(em1 / r, axis=1)
    p2 = np.mean((em1 - r) / r**2, axis=1)
    p3 = np.mean((em1 - r - 0.5 * r * r) / r**3, axis=1)
    return p1, p2, p3


def _etdrk4_stepper(lin: np.ndarray, dt: float, F):
    z = dt * lin
    E = np.exp(z)
    if F is None:
        return lambda c: E * c
    E2 = np.exp(0.5 * z)
    p1, p2, p3 = _phi(z)
    h1, h2, _ = _phi(0.5 * z)
    a2 = 0.5 * dt * h1
    a31, a32 = dt * (0.5 * h1 - h2), dt * h2
    a41, a43 = dt * (p1 - 2.0 * p2), 2.0 * dt * p2
    b1 = dt * (p1 - 3.0 * p2 + 4.0 * p3)
    b23 = dt * (2.0 * p2 - 4.0 * p3)
    b4 = dt * (4.0 * p3 - p2)

    def step(c):
        N1 = F(c)
        N2 = F(E2 * c + a2 * N1)
        N3 = F(E2 * c + a31 * N1 + a32 * N2)
        N4 = F(E * c + a41 * N1 + a43 * N3)
        return E * c + b1 * N1 + b23 * (N2 + N3) + b4 * N4

    return step


def _ifrk4_stepper(lin: np.ndarray, dt: float, F):
    E = np.exp(0.5 * dt * lin)
    E2 = E * E
    if F is None:
        return lambda c: E2 * c

    def step(c):
        k1 = F(c)
        k2 = F(E * (c + 0.5 * dt * k1))
        k3 = F(E * c + 0.5 * dt * k2)
        k4 = F(E2 * c + dt * (E * k3))
        return E2 * c + (dt / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)

    return step


def default_dt(u0: TorusField, N: int) -> float:
    return min(1e-3, 0.25 / (N * max(1.0, u0.sup_norm())))


def _check_state(c: np.ndarray, t: float, P: int) -> None:
    if not np.all(np.isfinite(c)):
        raise BlowupDetected(f"non-finite coefficient at t={t:.6g}")
    # sum of |c_n| bounds the sup norm and is cheap
    bound = abs(c[0]) + 2.0 * np.sum(np.abs(c[1:]))
    if bound > _BLOWUP:
        u = scipy.fft.irfft(np.concatenate([c, np.zeros(max(P // 2 + 1 - c.size, 0))]), n=P) * P
        if np.max(np.abs(u)) > _BLOWUP:
            raise BlowupDetected(f"sup norm above {_BLOWUP:g} at t={t:.6g}")
    if abs(c[0].imag) > 1e-8:
        raise RealnessViolation(f"imaginary mean residue {c[0].imag:.3e} at t={t:.6g}")


def evolve(u0: TorusField, cfg: SolverConfig) -> Trajectory:
    """Advance ``u0`` to ``cfg.T`` with the configured exponential RK4 scheme.

    The step is shrunk so that an integer number of steps lands exactly on
    ``T``.  States are recorded every ``sample_every`` steps and at ``T``.
    """
    N = cfg.N
    u = u0.resized(N)
    dt_req = cfg.dt if cfg.dt is not None else default_dt(u, N)
    steps = max(1, math.ceil(cfg.T / dt_req - 1e-9)) if cfg.T > 0 else 0
    dt = cfg.T / steps if steps else dt_req
    echo = cfg.describe() | {"dt": dt_req, "dt_effective": dt, "steps": steps}

    lin = linear_symbol(cfg.symbol, np.arange(N + 1))
    F = _Nonlinear(N, cfg.cutoff) if cfg.nonlinearity_enabled else None
    step = _etdrk4_stepper(lin, dt, F) if cfg.scheme == "etdrk4" else _ifrk4_stepper(lin, dt, F)
    P = F.P if F is not None else grid_size(N)

    c = np.array(u.coeffs)
    times = [0.0]
    states = [TorusField(c)]
    for k in range(1, steps + 1):
        c = step(c)
        t = k * dt
        _check_state(c, t, P)
        if k % cfg.sample_every == 0 or k == steps:
            times.append(cfg.T if k == steps else t)
            states.append(TorusField(c))
    return Trajectory(np.array(times), states, echo)


def _max_gap(a: Trajectory, b: Trajectory) -> float:
    lookup = {round(t, 12): s for t, s in zip(b.times, b.states)}
    gaps = [
        (s - lookup[round(t, 12)]).l2_norm()
        for t, s in zip(a.times, a.states)
        if round(t, 12) in lookup
    ]
    return max(gaps, default=0.0)


def self_check(u0: TorusField, cfg: SolverConfig) -> float:
    """Step-doubling estimate: sup over shared times of ``||u_dt - u_{dt/2}||``."""
    dt = cfg.dt if cfg.dt is not None else default_dt(u0.resized(cfg.N), cfg.N)
    coarse = evolve(u0, replace(cfg, dt=dt))
    fine = evolve(u0, replace(cfg, dt=coarse.config["dt_effective"] / 2.0,
                              sample_every=2 * cfg.sample_every))
    return _max_gap(coarse, fine)


def rough_data(N: int, s: float, seed: int = 0, scale: float = 1.0) -> TorusField:
    """Band-limited surrogate for ``H^s`` data, ``|u_hat(n)| = n^{-(s+1/2)-0.01}``.

    Phases are uniform and seeded; the mean is zero.
    """
    rng = np.random.default_rng(seed)
    n = np.arange(1, N + 1, dtype=np.float64)
    amp = n ** (-(s + 0.5) - 0.01)
    phase = rng.uniform(0.0, 2.0 * np.pi, N)
    c = np.zeros(N + 1, dtype=np.complex128)
    c[1:] = scale * amp * np.exp(1j * phase)
    return TorusField(c)
