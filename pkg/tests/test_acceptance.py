"""End-to-end acceptance checks at production resolution.

Each test prints a single ``criterion <id> PASS|FAIL <detail>`` line; the lines
are collected again in the terminal summary.
"""
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from qkr.classical import (
    ClassicalState,
    FixedPointType,
    classify_fixed_point,
    inverse_map_step,
    jacobian,
    lyapunov,
    map_step,
)
from qkr.config import ExperimentConfig
from qkr.core import derive_params, discrete_norm
from qkr.experiments import (
    correlation,
    delocalization_boundary,
    evolve,
    initial_state,
    overflow_kick,
    run_disintegration,
    run_extrema_sweep,
    run_k_sweep,
    run_oracle_check,
    run_phase_stability,
    run_sigma_sweep,
    run_time_series,
)
from qkr.observables import cumulants, principal_squeezing
from qkr.propagator import forward_transform, inverse_transform, kick_step

from .conftest import wrapped_distance

pytestmark = pytest.mark.slow

DEFAULTS = ExperimentConfig()


def test_c01_unitarity(report_line):
    cfg = replace(DEFAULTS, K_grid=[0.8])
    params = derive_params(0.8, cfg.sigma, cfg.hbar)
    state = initial_state(cfg, cfg.sigma)
    drift_x = drift_p = 0.0
    for _ in range(20):
        state = kick_step(state, params, enforce_localized=False)
        drift_x = max(drift_x, abs(discrete_norm(state) - 1.0))
        drift_p = max(drift_p, abs(forward_transform(state).norm() - 1.0))
    passed = max(drift_x, drift_p) < 1e-10
    report_line(1, passed, f"norm drift over 20 kicks: position {drift_x:.2e}, momentum {drift_p:.2e} (< 1e-10)")
    assert passed


def test_c02_oracle(report_line):
    report = run_oracle_check(DEFAULTS)
    report_line(2, report.max_deviation < 1e-10,
                f"N=256, 5 kicks: max |dA| = {report.max_deviation:.2e} at k={report.worst_k}, "
                f"n={report.worst_n} (< 1e-10)")
    assert report.max_deviation < 1e-10


def test_c03_coherent_start(report_line):
    worst, all_degenerate = 0.0, True
    for sigma in (0.004, 0.005, 0.006, 0.007):
        for K in (0.2, 1.0, 2.0):
            rec = run_time_series(replace(DEFAULTS, sigma=sigma, K_grid=[K], n_kicks=1))[0]
            worst = max(worst, abs(rec.S - 1.0), abs(rec.S_bar - 1.0))
            all_degenerate &= rec.extra["degenerate"] == 1
    passed = worst < 1e-8 and all_degenerate
    report_line(3, passed, f"max |S(0) - 1| = {worst:.2e} (< 1e-8); degenerate phase flagged: {all_degenerate}")
    assert passed


def _direct_quadrature_factory(state, params):
    """theta -> variance of sqrt(2/hbar)(sqrt(g) dx cos + dp sin / sqrt(g)), from the wave function."""
    cums = cumulants(state, params.hbar)
    amps = forward_transform(state)
    amps.amps *= params.hbar * amps.k - cums.mean_p
    u = math.sqrt(params.gamma) * (state.grid.x - cums.mean_x) * state.amplitudes
    v = inverse_transform(amps, state.grid).amplitudes / math.sqrt(params.gamma)
    dx = state.grid.dx
    uu, vv, uv = (np.vdot(u, u).real * dx, np.vdot(v, v).real * dx, np.vdot(u, v).real * dx)

    def variance(theta):
        c, s = np.cos(theta), np.sin(theta)
        return 2.0 / params.hbar * (c * c * uu + s * s * vv + 2.0 * c * s * uv)

    return cums, variance


@pytest.mark.parametrize("K", [0.8, 1.2])
def test_c04_principal_squeezing(report_line, K):
    cfg = replace(DEFAULTS, K_grid=[K])
    params = derive_params(K, cfg.sigma, cfg.hbar)
    thetas = np.linspace(0.0, math.pi, 3600, endpoint=False)
    step = thetas[1]
    worst_gap, worst_product, states = 0.0, math.inf, 0
    for n, state, report in evolve(initial_state(cfg, cfg.sigma), params, 10, cfg.epsilon):
        if not report.localized:
            break
        cums, variance = _direct_quadrature_factory(state, params)
        s, s_bar = principal_squeezing(cums, params)
        values = variance(thetas)
        i = int(np.argmin(values))
        refined = minimize_scalar(variance, bounds=(thetas[i] - step, thetas[i] + step), method="bounded",
                                  options={"xatol": 1e-12})
        grid_min = min(values[i], refined.fun)
        worst_gap = max(worst_gap, abs(s - grid_min))
        worst_product = min(worst_product, s * s_bar)
        states += 1
    passed = states == 11 and worst_gap < 1e-6 and worst_product >= 1 - 1e-9
    report_line(4, passed, f"K={K}: {states} states, max |S - min_theta| = {worst_gap:.2e} (< 1e-6), "
                           f"min S*S_bar = {worst_product:.6f} (>= 1)")
    assert passed


def test_c05_quantum_classical(report_line):
    records = run_time_series(replace(DEFAULTS, K_grid=[0.8], n_kicks=4))
    dx = [wrapped_distance(r.extra["x_mean"], r.extra["x_cl"]) for r in records]
    dp = [abs(r.extra["p_mean"] - r.extra["p_cl"]) for r in records]
    passed = len(records) == 5 and max(dx) < 1e-2
    report_line(5, passed, f"n<=4, K=0.8: max |<x> - x_cl| = {max(dx):.2e} (< 1e-2); "
                           f"max |<p> - p_cl| = {max(dp):.2e}")
    assert passed


def test_c06_lyapunov(report_line):
    lam10, lam6 = lyapunov(10.0), lyapunov(6.0)
    e10 = abs(lam10 / math.log(5.0) - 1.0)
    e6 = abs(lam6 / math.log(3.0) - 1.0)
    passed = e10 < 0.1 and e6 < 0.1
    report_line(6, passed, f"lambda(10) = {lam10:.4f} vs ln5 ({e10:.1%}), lambda(6) = {lam6:.4f} vs ln3 ({e6:.1%}) (< 10%)")
    assert passed


@pytest.fixture(scope="module")
def c07_config():
    return replace(DEFAULTS, sigma=0.007, n_points=2**15, threads=4)


def test_c07_fixed_kick_correlation(report_line, c07_config):
    r, rho, count = correlation(run_k_sweep(c07_config, 3))
    report_line("7a", r < -0.8, f"n=3, sigma=0.007, N=2^15: Pearson r(ln S, ln d) = {r:.3f} "
                                f"(Spearman {rho:.3f}, {count} rows) (< -0.8)")
    assert r < -0.8


def test_c07_extrema_correlation(report_line, c07_config):
    r, rho, count = correlation(run_extrema_sweep(c07_config, 6))
    report_line("7b", r < -0.8, f"six kicks, N=2^15: Pearson r(ln S_min, ln d_max) = {r:.3f} "
                                f"(Spearman {rho:.3f}, {count} localized rows) (< -0.8)")
    assert r < -0.8


def test_c08_delocalization_boundary(report_line):
    records = run_extrema_sweep(replace(DEFAULTS, sigma=0.007, threads=4), 6)
    boundary = delocalization_boundary(records)
    flagged = [r.K for r in records if r.delocalized]
    passed = boundary is not None and abs(boundary - 1.7) <= 0.2
    report_line(8, passed, f"first K delocalized within six kicks = {boundary} (1.7 +- 0.2); "
                           f"{len(flagged)} of {len(records)} K values flagged")
    assert passed


@pytest.fixture(scope="module")
def phase_records():
    return run_phase_stability(replace(DEFAULTS, n_kicks=4, threads=4))


def _max_sin2d(records, n, K_min=0.0):
    rows = [r for r in records if r.n == n and r.K >= K_min - 1e-12 and not r.delocalized]
    best = max(rows, key=lambda r: abs(r.extra["sin_2D"]))
    return abs(best.extra["sin_2D"]), best.K, len(rows)


def test_c09_phase_stable_early(report_line, phase_records):
    value, K, count = _max_sin2d(phase_records, 2)
    report_line("9a", value <= 0.05, f"n=2: max |sin 2D| = {value:.4f} at K={K} over {count} K values (<= 0.05)")
    assert value <= 0.05


def test_c09_phase_unstable_later(report_line, phase_records):
    value, K, count = _max_sin2d(phase_records, 4, K_min=1.0)
    report_line("9b", value > 0.5, f"n=4: max |sin 2D| over K >= 1 = {value:.4f} at K={K} (> 0.5)")
    assert value > 0.5


def test_c10_sigma_monotonicity(report_line):
    sigmas = [0.004, 0.005, 0.006, 0.007]
    records = run_sigma_sweep(replace(DEFAULTS, K_grid=[0.8], n_kicks=3, threads=4), sigmas)
    table = {}
    for n in (1, 2, 3):
        table[n] = [next(r.S for r in records if r.sigma == s and r.n == n) for s in sigmas]
    monotone = {n: all(b > a for a, b in zip(v, v[1:])) for n, v in table.items()}
    passed = all(monotone.values())
    detail = "; ".join(f"n={n}: " + ", ".join(f"{s:.4g}" for s in v) for n, v in table.items())
    report_line(10, passed, f"K=0.8, S over sigma=0.004..0.007 strictly increasing at n=1,2,3: {detail}")
    assert passed


@pytest.fixture(scope="module")
def disintegration_records():
    return run_disintegration(replace(DEFAULTS, K_grid=[1.2], n_kicks=22), [6, 18])


def test_c11_bell_shape_then_fragments(report_line, disintegration_records):
    count = {r.n: r.extra["subpackets"] for r in disintegration_records}
    passed = count[6] == 1 and count[18] > 10
    report_line("11a", passed, f"K=1.2, sigma=0.006: subpackets n=6: {count[6]} (== 1), n=18: {count[18]} (> 10); "
                               f"n=19: {count[19]}, n=20: {count[20]}")
    assert passed


def test_c11_spectral_overflow(report_line, disintegration_records):
    kick = overflow_kick(disintegration_records)
    passed = kick is not None and kick <= 22
    report_line("11b", passed, f"first kick where the {DEFAULTS.n_points}-point window overflows: {kick} (<= 22)")
    assert passed


def test_c12_classical_properties(report_line):
    rng = np.random.default_rng(99)
    det_err = max(abs(np.linalg.det(jacobian(x, K)) - 1.0)
                  for x, K in zip(rng.uniform(0, 2 * math.pi, 200), rng.uniform(0, 12, 200)))
    rev_err = 0.0
    for K, P0 in [(0.1, 0.5), (0.3, 1.3), (0.5, 2.0), (0.6, 0.2)]:
        s0 = s = ClassicalState(1.0, P0)
        for _ in range(100):
            s = map_step(s, K)
        for _ in range(100):
            s = inverse_map_step(s, K)
        rev_err = max(rev_err, wrapped_distance(s.x, s0.x), abs(s.P - s0.P))
    classification_ok = all(
        (classify_fixed_point(0.0, K) is FixedPointType.ELLIPTIC) == (K < 4.0)
        for K in np.linspace(0.01, 8.0, 800) if abs(K - 4.0) > 1e-9
    ) and all(classify_fixed_point(math.pi, K) is FixedPointType.HYPERBOLIC for K in (0.1, 1.0, 5.0))
    passed = det_err < 1e-12 and rev_err < 1e-9 and classification_ok
    report_line(12, passed, f"max |det J - 1| = {det_err:.1e}, reversibility error over 100 kicks = {rev_err:.1e} "
                            f"(< 1e-9), origin elliptic iff K < 4: {classification_ok}")
    assert passed
