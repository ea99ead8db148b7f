"""Truncated Lax operator and the resolvent quantities built from it.

On the Hardy space the Lax operator is ``L_u = -i d_x - T_u`` with Toeplitz
part ``(T_u f)^(n) = sum_m u_hat(n - m) f_hat(m)``.  Truncating to modes
``0 <= n < M`` gives the Hermitian matrix ``L[n, m] = n delta_nm - u_hat(n - m)``.

All quantities use the coefficient inner product
``<f, g> = sum_{n>=0} f_hat(n) conj(g_hat(n))``, i.e. the 1/2pi-normalized
L^2 pairing.  With ``m = (L_u + kappa)^{-1} Pi u``:

    beta(kappa; u)   = <m, Pi u>
    beta_s(kappa; u) = int_kappa^inf beta(k; u) k^{2s} dk
    dbeta[f]         = (1/2pi) int (|m|^2 + m + conj(m)) f dx

``beta``, ``beta_s`` and ``dbeta`` act on the zero-mean part of their field
arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import (
    CountExceedsDim,
    NotPositiveDefinite,
    QuadratureNotConverged,
    RealnessViolation,
    ThresholdNotFound,
)
from .evolution import Trajectory
from .spectral import (
    AnalyticField,
    SobolevRegularity,
    TorusField,
    derivative,
    hilbert,
    synthesize,
    szego_project,
)

__all__ = [
    "LaxMatrix",
    "ResolventVector",
    "BetaProfile",
    "DriftReport",
    "build_lax",
    "kappa_threshold",
    "resolvent_solve",
    "beta",
    "beta_s",
    "beta_s_quadrature",
    "beta_profile",
    "dbeta",
    "translation_check",
    "bo_vector_field",
    "bo_direction_check",
    "beta_drift_report",
    "eigen_gaps",
    "default_M",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_THRESHOLD_MARGIN = 0.5
_MAX_KAPPA = 2.0**30


@dataclass(frozen=True, eq=False)
class LaxMatrix:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigvals(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.matrix, check_finite=False)


@dataclass(frozen=True, eq=False)
class ResolventVector:
    coeffs: np.ndarray
    kappa: float
    residual: float

    def field(self) -> AnalyticField:
        return AnalyticField(self.coeffs)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    kappa_max: float
    panels: int
    evaluations: int


@dataclass(frozen=True, eq=False)
class BetaProfile:
    kappas: np.ndarray
    betas: np.ndarray
    s: float
    kappa: float
    beta_s: float
    error: float


@dataclass(frozen=True, eq=False)
class DriftReport:
    times: np.ndarray
    kappa: float
    s: float
    M: int
    beta: np.ndarray
    beta_s: np.ndarray
    quad_error: np.ndarray = field(repr=False)

    @property
    def rel_drift(self) -> np.ndarray:
        b0 = self.beta[0]
        if b0 == 0.0:
            return np.where(self.beta == 0.0, 0.0, np.inf)
        return self.beta / b0 - 1.0

    @property
    def max_rel_drift(self) -> float:
        return float(np.max(np.abs(self.rel_drift))) if self.beta.size else 0.0

    @property
    def log_growth(self) -> np.ndarray:
        b0 = self.beta_s[0]
        if b0 == 0.0:
            return np.zeros_like(self.beta_s)
        return np.log(self.beta_s / b0)

    @property
    def k_fit(self) -> float:
        """``max_{t>0} log(beta_s(t)/beta_s(0)) / t``; zero when undefined."""
        live = self.times > 0
        if not np.any(live) or self.beta_s[0] == 0.0:
            return 0.0
        return float(np.max(self.log_growth[live] / self.times[live]))

    def rows(self):
        for t, b, bs in zip(self.times, self.beta, self.beta_s):
            yield (float(t), self.kappa, float(b), float(bs))


def default_M(N: int) -> int:
    return 2 * N


def build_lax(u: TorusField, M: int) -> LaxMatrix:
    """``M x M`` truncation of ``L_u``; coefficients beyond ``u.N`` are zero."""
    if M < 2:
        raise ValueError("M must be >= 2")
    col = u.resized(M - 1).coeffs
    L = -scipy.linalg.toeplitz(col, np.conj(col))
    L[np.diag_indices(M)] += np.arange(M)
    return LaxMatrix(L)


def _rhs(u: TorusField, M: int) -> np.ndarray:
    return szego_project(u.zero_mean()).resized(M)


def kappa_threshold(u: TorusField, s: float, M: int) -> float:
    """Smallest ``kappa`` in ``{1, 2, 4, ...}`` with lowest eigenvalue of ``L_u + kappa`` above 0.5.

    Stands in for the existential size condition on ``kappa``: it certifies
    that the truncated resolvent exists and is coercive.
    """
    SobolevRegularity(s)
    L = build_lax(u.zero_mean(), M)
    lam = scipy.linalg.eigvalsh(L.matrix, subset_by_index=[0, 0], check_finite=False)[0]
    kappa = 1.0
    while lam + kappa <= _THRESHOLD_MARGIN:
        kappa *= 2.0
        if kappa > _MAX_KAPPA:
            raise ThresholdNotFound(f"lowest Lax eigenvalue {lam:.3e} needs kappa > 2^30")
    return kappa


def _factor(L: np.ndarray, kappa: float):
    A = L + kappa * np.eye(L.shape[0])
    try:
        return A, scipy.linalg.cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"L_u + {kappa:g} is not positive definite") from exc


def resolvent_solve(L: LaxMatrix, kappa: float, rhs: AnalyticField | np.ndarray) -> ResolventVector:
    b = rhs.resized(L.dim) if isinstance(rhs, AnalyticField) else np.asarray(rhs, dtype=np.complex128)
    A, cf = _factor(L.matrix, kappa)
    m = scipy.linalg.cho_solve(cf, b, check_finite=False)
    return ResolventVector(m, float(kappa), float(np.linalg.norm(A @ m - b)))


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > 1e-10 * max(abs(z.real), 1e-300) and abs(z.imag) > 1e-300:
        raise RealnessViolation(f"{what} has imaginary part {z.imag:.3e} (real {z.real:.3e})")
    return float(z.real)


def beta(u: TorusField, kappa: float, M: int) -> float:
    b = _rhs(u, M)
    m = resolvent_solve(build_lax(u.zero_mean(), M), kappa, b)
    return _real(np.vdot(b, m.coeffs), "beta")


class _BetaCurve:
    """``kappa -> beta(kappa; u)`` for a fixed field, one factorization per node."""

    def __init__(self, u: TorusField, M: int):
        self.L = build_lax(u.zero_mean(), M).matrix
        self.b = _rhs(u, M)
        self.evaluations = 0

    def __call__(self, kappa: float) -> float:
        self.evaluations += 1
        _, cf = _factor(self.L, kappa)
        m = scipy.linalg.cho_solve(cf, self.b, check_finite=False)
        return _real(np.vdot(self.b, m), "beta")

    def moments(self) -> tuple[float, float, float]:
        """``<b, b>``, ``<b, L b>``, ``<L b, L b>`` for the large-kappa expansion."""
        Lb = self.L @ self.b
        return (
            float(np.vdot(self.b, self.b).real),
            float(np.vdot(self.b, Lb).real),
            float(np.vdot(Lb, Lb).real),
        )


def _panel(curve: _BetaCurve, s: float, ya: float, yb: float) -> float:
    """Gauss-Legendre on ``int beta(e^y) e^{(2s+1) y} dy`` over ``[ya, yb]``."""
    half = 0.5 * (yb - ya)
    ys = ya + half * (_GL_NODES + 1.0)
    vals = np.array([curve(math.exp(y)) for y in ys]) * np.exp((2.0 * s + 1.0) * ys)
    return half * float(np.dot(_GL_WEIGHTS, vals))


def _adaptive_panel(curve, s, ya, yb, whole, tol, depth):
    mid = 0.5 * (ya + yb)
    left = _panel(curve, s, ya, mid)
    right = _panel(curve, s, mid, yb)
    err = abs(left + right - whole)
    if err <= tol:
        return left + right, err, 2
    if depth == 0:
        raise QuadratureNotConverged(
            f"panel [{math.exp(ya):.4g}, {math.exp(yb):.4g}] stalled at error {err:.3e}"
        )
    l, el, nl = _adaptive_panel(curve, s, ya, mid, left, 0.5 * tol, depth - 1)
    r, er, nr = _adaptive_panel(curve, s, mid, yb, right, 0.5 * tol, depth - 1)
    return l + r, el + er, nl + nr


def beta_s_quadrature(
    u: TorusField,
    s: float,
    kappa: float,
    M: int,
    rtol: float = 1e-8,
    max_doublings: int = 80,
) -> QuadratureResult:
    """``beta_s`` with its error budget.

    Log-spaced panels of ratio 2 carry 8 Gauss-Legendre nodes each and are
    bisected until a panel agrees with its two halves.  Beyond the upper
    limit ``K`` the resolvent expansion
    ``beta(k) = <b,b>/k - <b,Lb>/k^2 + O(k^-3)`` is integrated analytically;
    ``K`` doubles until the first neglected term is below ``rtol`` times the
    integral.
    """
    SobolevRegularity(s)
    curve = _BetaCurve(u, M)
    bb, bLb, LbLb = curve.moments()
    if bb == 0.0:
        return QuadratureResult(0.0, 0.0, float(kappa), 0, 0)
    # the 1/k expansion needs K beyond the spectral radius of L
    radius = float(np.max(np.sum(np.abs(curve.L), axis=1)))
    panel_tol = 0.25 * rtol
    y = math.log(kappa)
    total = 0.0
    q_err = 0.0
    panels = 0
    for _ in range(max_doublings):
        y_next = y + math.log(2.0)
        whole = _panel(curve, s, y, y_next)
        val, err, n = _adaptive_panel(curve, s, y, y_next, whole,
                                      panel_tol * max(abs(whole), 1e-300), depth=12)
        total += val
        q_err += err
        panels += n
        y = y_next
        K = math.exp(y)
        tail = bb * K ** (2.0 * s) / (2.0 * abs(s)) - bLb * K ** (2.0 * s - 1.0) / (1.0 - 2.0 * s)
        neglected = LbLb * K ** (2.0 * s - 2.0) / (2.0 - 2.0 * s)
        value = total + tail
        if K > 4.0 * radius and neglected <= rtol * abs(value):
            return QuadratureResult(value, q_err + neglected, K, panels, curve.evaluations)
    raise QuadratureNotConverged(f"tail bound still above rtol at kappa_max={math.exp(y):.3e}")


def beta_s(u: TorusField, s: float, kappa: float, M: int, rtol: float = 1e-8) -> float:
    return beta_s_quadrature(u, s, kappa, M, rtol).value


def beta_profile(u: TorusField, kappas, s: float, M: int, rtol: float = 1e-8) -> BetaProfile:
    kappas = np.asarray(kappas, dtype=np.float64)
    if kappas.size and np.any(np.diff(kappas) <= 0):
        raise ValueError("kappa grid must be strictly increasing")
    curve = _BetaCurve(u, M)
    betas = np.array([curve(k) for k in kappas])
    q = beta_s_quadrature(u, s, float(kappas[0]), M, rtol)
    return BetaProfile(kappas, betas, s, float(kappas[0]), q.value, q.error)


def _grid_for(M: int, N: int) -> int:
    return scipy.fft.next_fast_len(max(M + N + 1, 2 * N + 1))


def dbeta(u: TorusField, kappa: float, f: TorusField, M: int) -> float:
    """Directional derivative of ``beta(kappa; .)`` at ``u`` along real ``f``.

    ``|m|^2 + m + conj(m)`` is sampled on a grid fine enough that the
    discrete mean of its product with ``f`` is exact.
    """
    b = _rhs(u, M)
    m = resolvent_solve(build_lax(u.zero_mean(), M), kappa, b)
    fz = f.zero_mean()
    P = _grid_for(M, fz.N)
    ms = m.field().samples(P)
    g = np.abs(ms) ** 2 + 2.0 * ms.real
    return float(np.mean(g * synthesize(fz, P)))


def translation_check(u: TorusField, kappa: float, M: int) -> float:
    """``|dbeta[u_x]| / ||u||^2``: zero for a translation-invariant functional."""
    nrm = u.zero_mean().l2_norm()
    if nrm == 0.0:
        return 0.0
    return abs(dbeta(u, kappa, derivative(u), M)) / nrm**2


def bo_vector_field(u: TorusField) -> TorusField:
    """``H u_xx - 2 u u_x`` without truncation (carried on ``2N`` modes)."""
    N2 = 2 * u.N
    w = u.resized(N2)
    P = scipy.fft.next_fast_len(4 * u.N + 1, real=True)
    x = synthesize(w, P)
    sq = scipy.fft.rfft(x * x)[: N2 + 1] / P
    n = np.arange(N2 + 1)
    disp = hilbert(derivative(derivative(w))).coeffs
    return TorusField(disp - 1j * n * sq)


def bo_direction_check(u: TorusField, kappa: float, M: int) -> float:
    """``|dbeta[BO(u)]|`` scaled by ``||u||^2 (1 + ||u||)``."""
    nrm = u.zero_mean().l2_norm()
    if nrm == 0.0:
        return 0.0
    return abs(dbeta(u, kappa, bo_vector_field(u.zero_mean()), M)) / (nrm**2 * (1.0 + nrm))


def beta_drift_report(
    traj: Trajectory, kappa: float, s: float, M: int, rtol: float = 1e-8, with_beta_s: bool = True
) -> DriftReport:
    n = len(traj)
    b = np.zeros(n)
    bs = np.zeros(n)
    err = np.zeros(n)
    for i, u in enumerate(traj.states):
        b[i] = beta(u, kappa, M)
        if with_beta_s:
            q = beta_s_quadrature(u, s, kappa, M, rtol)
            bs[i], err[i] = q.value, q.error
    return DriftReport(np.asarray(traj.times), float(kappa), float(s), int(M), b, bs, err)


def eigen_gaps(L: LaxMatrix, count: int) -> np.ndarray:
    """``lambda_n - lambda_{n-1} - 1`` for ``n = 1..count`` (sorted spectrum)."""
    if count > L.dim - 1:
        raise CountExceedsDim(f"{count} gaps need at least {count + 1} eigenvalues, have {L.dim}")
    lam = L.eigvals()
    return np.diff(lam[: count + 1]) - 1.0
