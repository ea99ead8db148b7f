"""Fourier-side representation of real fields on the torus.

Coefficients follow the normalization

    f_hat(n) = (1/2pi) * integral_0^{2pi} exp(-i n x) f(x) dx,

so that ``f(x) = sum_n f_hat(n) exp(i n x)`` and Parseval reads
``||f||_{L^2}^2 = sum_n |f_hat(n)|^2`` (the L^2 norm is itself taken with the
1/2pi-normalized measure).  Only modes ``n >= 0`` are stored for real fields;
negative modes are implied by ``f_hat(-n) = conj(f_hat(n))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import KappaOutOfRange, RealnessViolation, SampleCountTooSmall

__all__ = [
    "TorusField",
    "AnalyticField",
    "SobolevRegularity",
    "analyze",
    "synthesize",
    "hilbert",
    "szego_project",
    "sobolev_norm",
    "tail_norm",
    "derivative",
    "shift",
    "grid_size",
    "grid",
]

_MEAN_IMAG_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TorusField:
    """Real field with retained modes ``0..N``.

    ``coeffs[n]`` is ``f_hat(n)``.  The imaginary part of the mean is dropped
    if it is below 1e-10 and rejected otherwise.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size < 1:
            raise ValueError("a TorusField needs at least the mean mode")
        if abs(c[0].imag) > _MEAN_IMAG_TOL:
            raise RealnessViolation(f"mean mode has imaginary part {c[0].imag:.3e}")
        c[0] = c[0].real
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def N(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def zeros(cls, N: int) -> TorusField:
        return cls(np.zeros(N + 1, dtype=np.complex128))

    @classmethod
    def from_modes(cls, N: int, modes: dict[int, complex]) -> TorusField:
        """Build a field from ``{n: f_hat(n)}`` with ``0 <= n <= N``."""
        c = np.zeros(N + 1, dtype=np.complex128)
        for n, v in modes.items():
            c[n] = v
        return cls(c)

    def resized(self, N: int) -> TorusField:
        """Zero-pad or truncate to ``N`` retained modes."""
        c = np.zeros(N + 1, dtype=np.complex128)
        k = min(N, self.N) + 1
        c[:k] = self.coeffs[:k]
        return TorusField(c)

    def two_sided(self, K: int | None = None) -> np.ndarray:
        """Coefficients ``f_hat(k)`` for ``k = -K..K`` (index ``k + K``)."""
        K = self.N if K is None else K
        c = self.resized(K).coeffs
        return np.concatenate([np.conj(c[:0:-1]), c])

    def l2_norm(self) -> float:
        c = self.coeffs
        return float(np.sqrt(abs(c[0]) ** 2 + 2.0 * np.sum(np.abs(c[1:]) ** 2)))

    def sup_norm(self, points: int | None = None) -> float:
        return float(np.max(np.abs(synthesize(self, points))))

    def zero_mean(self) -> TorusField:
        c = self.coeffs.copy()
        c[0] = 0.0
        return TorusField(c)

    def _binary(self, other, op):
        if isinstance(other, TorusField):
            N = max(self.N, other.N)
            return TorusField(op(self.resized(N).coeffs, other.resized(N).coeffs))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if np.iscomplexobj(scalar) or not np.isscalar(scalar):
            return NotImplemented
        return TorusField(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return TorusField(-self.coeffs)

    def to_dict(self) -> dict:
        return {"N": self.N, "coeffs": [[float(z.real), float(z.imag)] for z in self.coeffs]}

    @classmethod
    def from_dict(cls, d: dict) -> TorusField:
        N = int(d["N"])
        raw = np.asarray(d["coeffs"], dtype=np.float64).reshape(-1, 2)
        if raw.shape[0] != N + 1:
            raise ValueError(f"expected {N + 1} coefficients, got {raw.shape[0]}")
        return cls(raw[:, 0] + 1j * raw[:, 1])


@dataclass(frozen=True, eq=False)
class AnalyticField:
    """Truncated element of the Hardy space: modes ``0..N``, no symmetry."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def N(self) -> int:
        return self.coeffs.size - 1

    def project(self) -> AnalyticField:
        # already supported on n >= 0
        return AnalyticField(self.coeffs.copy())

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def resized(self, size: int) -> np.ndarray:
        """Coefficient vector of length ``size`` (zero-padded or truncated)."""
        out = np.zeros(size, dtype=np.complex128)
        k = min(size, self.coeffs.size)
        out[:k] = self.coeffs[:k]
        return out

    def samples(self, points: int) -> np.ndarray:
        """Complex samples of ``sum_{n>=0} c_n exp(inx)`` on the uniform grid."""
        if points < self.coeffs.size:
            raise SampleCountTooSmall(f"{points} points cannot carry {self.coeffs.size} modes")
        c = np.zeros(points, dtype=np.complex128)
        c[: self.coeffs.size] = self.coeffs
        return scipy.fft.ifft(c) * points


@dataclass(frozen=True)
class SobolevRegularity:
    s: float

    def __post_init__(self):
        if not -0.5 < self.s < 0.0:
            raise ValueError(f"regularity must lie in (-1/2, 0), got {self.s}")

    @property
    def eps(self) -> float:
        return 0.5 * (0.5 - abs(self.s))


def grid_size(N: int) -> int:
    """Smallest fast-transform length carrying ``2N+1`` samples."""
    return scipy.fft.next_fast_len(2 * N + 1, real=True)


def grid(points: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(points) / points


def analyze(samples, N: int | None = None) -> TorusField:
    """Fourier coefficients ``0..N`` of uniformly spaced samples on [0, 2pi)."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    P = x.size
    if N is None:
        N = (P - 1) // 2
    if P < 2 * N + 1:
        raise SampleCountTooSmall(f"{P} samples cannot resolve {N} modes (need {2 * N + 1})")
    c = scipy.fft.rfft(x)[: N + 1] / P
    return TorusField(c)


def synthesize(f: TorusField, points: int | None = None) -> np.ndarray:
    """Samples of ``sum_n f_hat(n) exp(inx)`` at ``x_j = 2 pi j / points``."""
    P = grid_size(f.N) if points is None else int(points)
    if P < 2 * f.N + 1:
        raise SampleCountTooSmall(f"{P} points cannot carry {f.N} modes")
    # Hermitian extension is real apart from Im c_0
    if abs(f.coeffs[0].imag) > _MEAN_IMAG_TOL:
        raise RealnessViolation("imaginary residue above 1e-10")
    c = np.zeros(P // 2 + 1, dtype=np.complex128)
    c[: f.N + 1] = f.coeffs
    return scipy.fft.irfft(c, n=P) * P


def hilbert(f: TorusField) -> TorusField:
    c = -1j * f.coeffs
    c[0] = 0.0
    return TorusField(c)


def szego_project(f: TorusField | AnalyticField) -> AnalyticField:
    return AnalyticField(np.array(f.coeffs, dtype=np.complex128))


def derivative(f: TorusField) -> TorusField:
    n = np.arange(f.N + 1)
    return TorusField(1j * n * f.coeffs)


def shift(f: TorusField, a: float) -> TorusField:
    """Coefficients of ``x -> f(x - a)``, applied as an exact Fourier phase."""
    n = np.arange(f.N + 1)
    return TorusField(f.coeffs * np.exp(-1j * n * a))


def _weighted(f: TorusField, weights: np.ndarray, mask: np.ndarray) -> float:
    p = np.abs(f.coeffs) ** 2 * weights
    mult = np.full(f.N + 1, 2.0)
    mult[0] = 1.0
    return float(np.sqrt(np.sum((mult * p)[mask])))


def sobolev_norm(f: TorusField, r: float, kappa: float = 1.0) -> float:
    """``(sum_n |f_hat(n)|^2 (|n| + kappa)^{2r})^{1/2}`` over all retained modes."""
    if not kappa >= 1.0:
        raise KappaOutOfRange(f"kappa must be >= 1, got {kappa}")
    n = np.arange(f.N + 1)
    return _weighted(f, (n + kappa) ** (2.0 * r), np.ones(f.N + 1, dtype=bool))


def tail_norm(f: TorusField, r: float, cutoff: int) -> float:
    """The ``H^r`` norm (weights ``(|n|+1)^{2r}``) restricted to ``|n| >= cutoff``."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    n = np.arange(f.N + 1)
    return _weighted(f, (n + 1.0) ** (2.0 * r), n >= cutoff)
