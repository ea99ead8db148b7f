"""Acceptance criteria, one test each, at the tolerances they were specified with."""
import time

import numpy as np
import pytest

from bopert.config import load_config
from bopert.evolution import SolverConfig, evolve
from bopert.gauge import mean
from bopert.lax import beta, dbeta, kappa_threshold, translation_check
from bopert.multipliers import ilw_boosted_symbol, ilw_full_symbol, smith_symbol, zero_symbol
from bopert.runner import Scenario, run_scenario
from bopert.spectral import TorusField

DATUM = TorusField.from_modes(128, {1: 1.0, 2: -0.25j})  # 2cos x + 0.5 sin 2x


def run(kind, *over):
    return run_scenario(Scenario(kind, load_config(overrides=list(over), kind=kind)))


def smooth_pair(seed, N=16):
    rng = np.random.default_rng(seed)
    n = np.arange(N + 1)
    out = []
    for _ in range(2):
        c = (rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)) * np.exp(-0.7 * n)
        c[0] = 0
        out.append(TorusField(c))
    return out


def test_criterion_01_beta_conservation(acceptance_line):
    start = time.perf_counter()
    traj = evolve(DATUM, SolverConfig(N=128, dt=1e-3, T=1.0, sample_every=10))
    kappa, M = 8.0, 256
    assert kappa_threshold(DATUM, -0.25, M) <= kappa
    b = np.array([beta(u, kappa, M) for u in traj.states])
    drift = float(np.max(np.abs(b / b[0] - 1)))
    elapsed = time.perf_counter() - start
    ok = drift <= 1e-6 and elapsed < 120
    acceptance_line(1, "beta conservation under BO", f"{drift:.3e}", "<=", "1e-6", ok,
                    f"{len(traj)} samples, runtime {elapsed:.1f}s < 120s")
    assert ok


def test_criterion_02_gradient(acceptance_line):
    start = time.perf_counter()
    worst = 0.0
    for seed in range(10):
        u, f = smooth_pair(seed)
        M, kappa, h = 64, 8.0, 1e-5
        fd = (beta(u + f * h, kappa, M) - beta(u - f * h, kappa, M)) / (2 * h)
        worst = max(worst, abs(dbeta(u, kappa, f, M) - fd) / abs(fd))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 60
    acceptance_line(2, "dbeta vs central differences", f"{worst:.3e}", "<=", "1e-6", ok,
                    f"10 seeded pairs, h=1e-5, runtime {elapsed:.1f}s")
    assert ok


def test_criterion_03_translation(acceptance_line):
    cases = [TorusField.from_modes(32, {1: 1.0})] + [smooth_pair(s)[0] for s in range(5)]
    worst, monotone = 0.0, True
    floor = 1e-13  # round-off level of the normalized check
    for u in cases:
        vals = [translation_check(u, 4.0, M) for M in (64, 128, 256)]
        worst = max(worst, max(vals))
        monotone &= all(b <= max(a, floor) for a, b in zip(vals, vals[1:]))
    ok = worst <= 1e-8 and monotone
    acceptance_line(3, "translation invariance of dbeta", f"{worst:.3e}", "<=", "1e-8", ok,
                    f"nonincreasing under M-doubling above {floor:g}: {monotone}")
    assert ok


def test_criterion_04_hand_oracle(acceptance_line):
    val = beta(TorusField.from_modes(1, {1: 1.0}), 2.0, 2)
    err = abs(val - 0.4)
    ok = err <= 1e-14
    acceptance_line(4, "hand-oracle beta", f"|{val!r} - 0.4|={err:.1e}", "<=", "1e-14", ok)
    assert ok


@pytest.mark.parametrize(
    "label,over",
    [
        ("boosted ILW delta=1", ["symbol.kind=ilw-boosted", "symbol.delta=1"]),
        ("Smith", ["symbol.kind=smith"]),
        ("Rayleigh gamma=-1", ["symbol.kind=rayleigh", "symbol.gamma=-1", "tol.kfit_max=1e-3"]),
    ],
)
def test_criterion_05_exp_bound(acceptance_line, label, over):
    rec = run("exp-bound", "solver.N=64", "solver.T=1", "solver.dt=1e-3", "solver.sample_every=100", *over)
    names = ["growth_bound", "kfit_finite"]
    names += ["kfit_max"] if "rayleigh" in over[0] else ["kfit_stable_dt_half", "kfit_stable_M_double"]
    verdicts = [rec.verdict(n) for n in names]
    ok = all(v.passed for v in verdicts)
    K = rec.manifest["K_fit"]
    if "rayleigh" in over[0]:
        acceptance_line(5, f"exp bound, {label}", f"K_fit={K:.4g}", "<=", "1e-3", ok)
    else:
        stab = max(rec.verdict("kfit_stable_dt_half").measured, rec.verdict("kfit_stable_M_double").measured)
        acceptance_line(5, f"exp bound, {label}", f"K_fit={K:.4g}, rel. change {stab:.2e}", "<=", "0.10", ok,
                        "log ratio <= K_fit t on [0,1]")
    assert ok, [v.line() for v in rec.verdicts]


def test_criterion_06_ilw_limit(acceptance_line):
    start = time.perf_counter()
    rec = run("ilw-limit", "ladder.deltas=2,4,8,16", "solver.T=0.5", "ladder.norm_s=-0.25")
    elapsed = time.perf_counter() - start
    order, dec = rec.verdict("boosted_order"), rec.verdict("lab_decreasing")
    ok = order.passed and dec.passed and elapsed < 600
    acceptance_line(6, "infinite-depth limit", f"order={order.measured:.3g}", ">=", "1.8", ok,
                    f"lab max error ratio {dec.measured:.3g} < 1, runtime {elapsed:.1f}s")
    assert ok


def test_criterion_07_gauge(acceptance_line):
    rec = run("gauge-check", "solver.N=128", "solver.T=0.5", "data.mean=0.5", "symbol.kind=rayleigh",
              "symbol.gamma=1")
    v = rec.verdict("gauge_equivalence")
    acceptance_line(7, "gauge equivalence", f"{v.measured:.3e}", "<=", "1e-8", v.passed,
                    f"dt={rec.manifest['config']['solver.dt']}")
    assert v.passed and rec.passed


def test_criterion_08_mean(acceptance_line):
    worst = 0.0
    u0 = TorusField.from_modes(128, {0: 0.3, 1: 1.0, 2: -0.25j})
    for sym in (zero_symbol(), smith_symbol(), ilw_boosted_symbol(1.0), ilw_full_symbol(2.0)):
        traj = evolve(u0, SolverConfig(N=128, dt=1e-3, T=1.0, symbol=sym, sample_every=20))
        worst = max(worst, max(abs(mean(u) - mean(u0)) for u in traj.states))
    ok = worst <= 1e-12
    acceptance_line(8, "mean conservation for a(0)=0", f"{worst:.3e}", "<=", "1e-12", ok,
                    "BO, Smith, boosted and full ILW")
    assert ok


def test_criterion_09_isospectral(acceptance_line):
    rec = run("isospectral", "solver.N=128", "beta.M=256", "solver.T=1", "isospectral.count=8")
    v = rec.verdict("eigenvalue_drift")
    acceptance_line(9, "isospectrality diagnostic", f"{v.measured:.3e}", "<=", "1e-4", v.passed)
    assert v.passed


def test_criterion_10_symbols(acceptance_line):
    rec = run("symbol-audit", "ladder.deltas=2,4,8,16")
    sym, order, smith = (rec.verdict(n) for n in ("real_symmetry", "boosted_decay_order", "smith_asymptotics"))
    ok = sym.passed and order.passed and smith.passed
    acceptance_line(10, "symbol audits", f"order={order.measured:.3g}, smith ratio={smith.measured:.6f}",
                    ">=/<=", "1.9 / 1", ok, f"real symmetry to 1e-14: {sym.passed}")
    assert ok


def test_criterion_11_tightness(acceptance_line):
    rec = run("tightness", "ladder.deltas=1,2,4,8,16")
    names = ["h_tail_nonincreasing", "h_tail_fraction", "fourier_tail_nonincreasing", "fourier_tail_fraction"]
    vs = [rec.verdict(n) for n in names]
    ok = all(v.passed for v in vs)
    acceptance_line(11, "tightness monitor",
                    f"h={vs[1].measured:.2e}, fourier={vs[3].measured:.2e}", "<=", "0.01", ok,
                    "tails nonincreasing in the cutoff")
    assert ok
