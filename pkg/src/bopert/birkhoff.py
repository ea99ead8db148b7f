"""Sequence-side objects: frequencies, the linear Birkhoff flow, weighted norms.

Actions are indexed from ``k = 1``; the ``k = 0`` summand of the frequency
map carries ``min{0, n} = 0`` and drops out.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ActionSequence",
    "BirkhoffState",
    "PhaseSchedule",
    "omega",
    "omegas",
    "linear_flow",
    "h_norm",
    "h_tail_norm",
]


@dataclass(frozen=True, eq=False)
class ActionSequence:
    """``gamma[k-1]`` holds the action of mode ``k >= 1``."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.array(self.gamma, dtype=np.float64).ravel()
        if np.any(g < 0):
            raise ValueError("actions must be nonnegative")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_state(cls, z: BirkhoffState) -> ActionSequence:
        return cls(np.abs(z.zeta) ** 2)

    @classmethod
    def from_gaps(cls, gaps, floor: float = 0.0) -> ActionSequence:
        """Actions from Lax eigen-gaps; round-off negatives are clipped to ``floor``."""
        return cls(np.maximum(np.asarray(gaps, dtype=np.float64), floor))

    @property
    def K_max(self) -> int:
        return self.gamma.size


@dataclass(frozen=True, eq=False)
class BirkhoffState:
    """``zeta[n-1]`` holds the coordinate of mode ``n >= 1``."""

    zeta: np.ndarray

    def __post_init__(self):
        z = np.array(self.zeta, dtype=np.complex128).ravel()
        if not np.all(np.isfinite(z)):
            raise ValueError("Birkhoff coordinates must be finite")
        z.setflags(write=False)
        object.__setattr__(self, "zeta", z)

    def to_dict(self) -> dict:
        return {"zeta": [[float(v.real), float(v.imag)] for v in self.zeta]}

    @classmethod
    def from_dict(cls, d: dict) -> BirkhoffState:
        raw = np.asarray(d["zeta"], dtype=np.float64).reshape(-1, 2)
        return cls(raw[:, 0] + 1j * raw[:, 1])


@dataclass(frozen=True, eq=False)
class PhaseSchedule:
    """Frequencies and accumulated phases ``t * omega_n`` for the autonomous flow."""

    omegas: np.ndarray

    def phases(self, t: float) -> np.ndarray:
        return t * self.omegas


def omegas(actions: ActionSequence, n_max: int) -> np.ndarray:
    """``omega_n = n^2 - 2 sum_k min(k, n) gamma_k`` for ``n = 1..n_max``.

    Uses ``sum_k min(k, n) g_k = sum_{k<=n} k g_k + n sum_{k>n} g_k``.
    """
    g = actions.gamma
    K = g.size
    n = np.arange(1, n_max + 1)
    k = np.arange(1, K + 1)
    head = np.concatenate([[0.0], np.cumsum(k * g)])  # head[j] = sum_{k<=j} k g_k
    tail = np.concatenate([[0.0], np.cumsum(g[::-1])])[::-1]  # tail[j] = sum_{k>j} g_k
    j = np.minimum(n, K)
    return n.astype(np.float64) ** 2 - 2.0 * (head[j] + n * tail[j])


def omega(actions: ActionSequence, n: int) -> float:
    if n < 1:
        raise ValueError("frequencies are defined for n >= 1")
    return float(omegas(actions, n)[-1])


def linear_flow(z0: BirkhoffState, actions: ActionSequence, t: float) -> BirkhoffState:
    """``zeta_n(t) = exp(i t omega_n) zeta_n(0)``."""
    w = omegas(actions, z0.zeta.size)
    return BirkhoffState(np.exp(1j * t * w) * z0.zeta)


def _weighted_sum(z: BirkhoffState, s: float, start: int) -> float:
    n = np.arange(1, z.zeta.size + 1, dtype=np.float64)
    w = n ** (2.0 * s + 1.0) * np.abs(z.zeta) ** 2
    return float(np.sqrt(np.sum(w[start - 1:])))


def h_norm(z: BirkhoffState, s: float) -> float:
    """``(sum_{n>=1} n^{2s+1} |zeta_n|^2)^{1/2}``."""
    return _weighted_sum(z, s, 1)


def h_tail_norm(z: BirkhoffState, s: float, cutoff: int) -> float:
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    if cutoff > z.zeta.size:
        return 0.0
    return _weighted_sum(z, s, cutoff)
