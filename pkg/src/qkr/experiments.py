"""Scenario drivers: time series, parameter sweeps, phase stability, disintegration.

Every driver returns a list of :class:`ExperimentRecord`, ordered by the
outer loop variable (``sigma``, then ``K``) and then by kick number.  K points
are independent and may run on a thread pool (``cfg.threads``); results are
merged back in grid order, so output never depends on the thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.signal import find_peaks
from scipy.stats import pearsonr, spearmanr

from .classical import ClassicalState, TangentState, dcl_series, trajectory
from .config import ExperimentConfig
from .core import TWO_PI, GaussianSpec, Grid, QuantumState, SimParams, Window, derive_params, gaussian_packet
from .observables import cumulants, squeezing_record
from .propagator import (
    DelocalizationReport,
    bessel_propagate,
    check_delocalization,
    default_band,
    forward_transform,
    kick_step,
)

NAN = float("nan")
RECORD_COLUMNS = ("n", "K", "sigma", "S", "S_bar", "theta_star", "d", "ln_S", "ln_d", "delocalized")


@dataclass
class ExperimentRecord:
    n: int
    K: float
    sigma: float
    S: float = NAN
    S_bar: float = NAN
    theta_star: float = NAN
    d: float = NAN
    delocalized: bool = False
    extra: dict = field(default_factory=dict)
    profiles: dict | None = None

    @property
    def ln_S(self) -> float:
        return math.log(self.S) if self.S > 0 else NAN

    @property
    def ln_d(self) -> float:
        return math.log(self.d) if self.d > 0 else NAN

    def row(self) -> dict:
        out = {name: getattr(self, name) for name in RECORD_COLUMNS}
        out.update(self.extra)
        return out


def _map_k(fn: Callable[[float], list], k_values: Sequence[float], threads: int) -> list:
    if threads <= 1 or len(k_values) <= 1:
        chunks = [fn(K) for K in k_values]
    else:
        with ThreadPoolExecutor(max_workers=min(threads, len(k_values))) as pool:
            chunks = list(pool.map(fn, k_values))
    return [rec for chunk in chunks for rec in chunk]


def initial_state(cfg: ExperimentConfig, sigma: float, x0: float | None = None) -> QuantumState:
    """Gaussian packet on the position window that keeps ``x0`` farthest from its edge."""
    x0 = cfg.x0 if x0 is None else x0
    x0 = x0 % TWO_PI
    if 0.5 * math.pi <= x0 < 1.5 * math.pi:
        window = Window.ZERO_TO_TWO_PI
    else:
        window = Window.MINUS_PI_TO_PI
        if x0 >= math.pi:
            x0 -= TWO_PI
    return gaussian_packet(Grid(cfg.n_points, window), GaussianSpec(x0, cfg.k0, sigma))


def evolve(state: QuantumState, params: SimParams, n_kicks: int, epsilon: float,
           terminate: bool = True) -> Iterator[tuple[int, QuantumState, DelocalizationReport]]:
    """Yield ``(n, state, report)`` for ``n = 0 .. n_kicks``.

    With ``terminate`` the iteration ends right after the first state that is
    not localized.
    """
    for n in range(n_kicks + 1):
        report = check_delocalization(state, epsilon)
        yield n, state, report
        if n == n_kicks or (terminate and not report.localized):
            return
        state = kick_step(state, params, epsilon=epsilon, enforce_localized=False)


def _measure(n: int, K: float, sigma: float, state: QuantumState, params: SimParams,
             report: DelocalizationReport) -> ExperimentRecord:
    if not report.localized:
        return ExperimentRecord(n, K, sigma, delocalized=True)
    rec = squeezing_record(cumulants(state, params.hbar, check=False), params)
    return ExperimentRecord(n, K, sigma, rec.S, rec.S_bar, rec.theta_star, rec.d,
                            extra={"degenerate": int(rec.degenerate_phase)})


def _classical_reference(cfg: ExperimentConfig, params: SimParams, sigma: float, n: int):
    """Classical orbit from the packet centre and the tangent length in ``(x, p)`` units."""
    s0 = ClassicalState(cfg.x0, params.beta * params.hbar * cfg.k0)
    dx, dp = cfg.tangent_dx, cfg.tangent_dp
    if dx == 0 and dp == 0:
        dx, dp = sigma, params.hbar / (2.0 * sigma)
    length = math.hypot(dx, dp)
    t0 = TangentState(dx / length, params.beta * dp / length)
    return trajectory(s0, params.K, n), dcl_series(s0, t0, params.K, n, p_scale=params.beta)


def run_time_series(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Squeezing and spread after every kick, alongside the matched classical orbit.

    Extra columns: ``x_mean``, ``p_mean`` (quantum centre, ``x`` reduced to
    ``[0, 2pi)``), ``x_cl``, ``p_cl`` (classical orbit, ``p = P / beta``),
    ``d_cl`` (classical tangent length, unit at ``n = 0``).
    """
    cfg.validate()

    def one(K):
        params = derive_params(K, cfg.sigma, cfg.hbar)
        orbit, d_cl = _classical_reference(cfg, params, cfg.sigma, cfg.n_kicks)
        out = []
        for n, state, report in evolve(initial_state(cfg, cfg.sigma), params, cfg.n_kicks, cfg.epsilon):
            rec = _measure(n, K, cfg.sigma, state, params, report)
            if report.localized:
                cums = cumulants(state, params.hbar, check=False)
                rec.extra.update(x_mean=cums.mean_x % TWO_PI, p_mean=cums.mean_p)
            else:
                rec.extra.update(x_mean=NAN, p_mean=NAN)
            rec.extra.update(x_cl=orbit[n, 0], p_cl=orbit[n, 1] / params.beta, d_cl=d_cl[n])
            out.append(rec)
        return out

    return _map_k(one, cfg.K_grid, cfg.threads)


def run_k_sweep(cfg: ExperimentConfig, n_fixed: int | None = None) -> list[ExperimentRecord]:
    """One record per K, taken after ``n_fixed`` kicks.

    A K whose packet delocalizes earlier yields a flagged record carrying the
    kick of delocalization in ``delocalized_at``.
    """
    cfg.validate()
    n_fixed = cfg.n_fixed if n_fixed is None else int(n_fixed)
    if n_fixed < 1:
        raise ValueError("n_fixed must be >= 1")

    def one(K):
        params = derive_params(K, cfg.sigma, cfg.hbar)
        for n, state, report in evolve(initial_state(cfg, cfg.sigma), params, n_fixed, cfg.epsilon):
            if not report.localized:
                rec = ExperimentRecord(n_fixed, K, cfg.sigma, delocalized=True)
                rec.extra["delocalized_at"] = n
                return [rec]
        rec = _measure(n_fixed, K, cfg.sigma, state, params, report)
        rec.extra["delocalized_at"] = NAN
        return [rec]

    return _map_k(one, cfg.K_grid, cfg.threads)


def run_extrema_sweep(cfg: ExperimentConfig, n_window: int | None = None) -> list[ExperimentRecord]:
    """Per K, the smallest ``S`` and the largest ``d`` over kicks ``1..n_window``.

    ``S``/``d`` of the record hold ``S_min``/``d_max``; ``S_bar`` and
    ``theta_star`` belong to the kick that attains ``S_min`` (``n_S_min``).
    Rows whose packet delocalizes within the window are flagged and left blank.
    """
    cfg.validate()
    n_window = cfg.n_window if n_window is None else int(n_window)
    if n_window < 1:
        raise ValueError("n_window must be >= 1")

    def one(K):
        params = derive_params(K, cfg.sigma, cfg.hbar)
        best = None
        d_max, n_d = -math.inf, 0
        for n, state, report in evolve(initial_state(cfg, cfg.sigma), params, n_window, cfg.epsilon):
            if not report.localized:
                rec = ExperimentRecord(n_window, K, cfg.sigma, delocalized=True)
                rec.extra.update(n_S_min=NAN, n_d_max=NAN, delocalized_at=n)
                return [rec]
            if n == 0:
                continue
            rec = _measure(n, K, cfg.sigma, state, params, report)
            if best is None or rec.S < best.S:
                best = rec
            if rec.d > d_max:
                d_max, n_d = rec.d, n
        out = ExperimentRecord(n_window, K, cfg.sigma, best.S, best.S_bar, best.theta_star, d_max)
        out.extra.update(n_S_min=best.n, n_d_max=n_d, delocalized_at=NAN)
        return [out]

    return _map_k(one, cfg.K_grid, cfg.threads)


def run_sigma_sweep(cfg: ExperimentConfig, sigma_list: Sequence[float] | None = None) -> list[ExperimentRecord]:
    """Time series of ``S`` for each initial width and each K of the grid."""
    cfg.validate()
    sigma_list = list(cfg.sigma_list if sigma_list is None else sigma_list)
    records = []
    for sigma in sigma_list:
        sub = replace(cfg, sigma=sigma).validate()

        def one(K, sub=sub, sigma=sigma):
            params = derive_params(K, sigma, sub.hbar)
            return [_measure(n, K, sigma, state, params, report)
                    for n, state, report in evolve(initial_state(sub, sigma), params,
                                                   sub.n_kicks, sub.epsilon)]

        records.extend(_map_k(one, sub.K_grid, sub.threads))
    return records


def run_phase_stability(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Optimal phases of two packets started ``perturbation_dx`` apart.

    ``theta_star`` is the phase for the start at ``x0``, ``theta_star_2`` for
    ``x0 - perturbation_dx``; ``D`` is their difference and ``sin_2D`` the
    quantity insensitive to the pi-periodicity of the phase.
    """
    cfg.validate()

    def one(K):
        params = derive_params(K, cfg.sigma, cfg.hbar)
        first = evolve(initial_state(cfg, cfg.sigma), params, cfg.n_kicks, cfg.epsilon)
        second = evolve(initial_state(cfg, cfg.sigma, cfg.x0 - cfg.perturbation_dx), params,
                        cfg.n_kicks, cfg.epsilon)
        out = []
        for (n, s1, r1), (_, s2, r2) in zip(first, second):
            if not (r1.localized and r2.localized):
                rec = ExperimentRecord(n, K, cfg.sigma, delocalized=True)
                rec.extra.update(theta_star_2=NAN, D=NAN, sin_2D=NAN, degenerate=NAN)
                out.append(rec)
                break
            rec = _measure(n, K, cfg.sigma, s1, params, r1)
            other = _measure(n, K, cfg.sigma, s2, params, r2)
            D = rec.theta_star - other.theta_star
            rec.extra.update(
                theta_star_2=other.theta_star,
                D=D,
                sin_2D=math.sin(2.0 * D),
                degenerate=int(rec.extra["degenerate"] or other.extra["degenerate"]),
            )
            out.append(rec)
        return out

    return _map_k(one, cfg.K_grid, cfg.threads)


def count_subpackets(abs_psi: np.ndarray, rel_height: float = 0.1, min_separation: int = 5) -> int:
    """Local maxima of ``|psi|`` above ``rel_height`` of the peak, at least ``min_separation`` apart.

    The profile is first rotated so its global minimum sits at index 0, which
    keeps a maximum on the periodic seam from being split or missed.
    """
    abs_psi = np.asarray(abs_psi, dtype=float)
    rolled = np.roll(abs_psi, -int(np.argmin(abs_psi)))
    peaks, _ = find_peaks(rolled, height=rel_height * rolled.max(), distance=min_separation)
    return int(peaks.size)


def run_disintegration(cfg: ExperimentConfig, snapshot_kicks: Sequence[int] | None = None) -> list[ExperimentRecord]:
    """Evolve without termination and record the break-up of the packet.

    Extra columns: ``subpackets``, ``edge_ratio_p``, ``edge_ratio_x`` and
    ``overflow``, which turns 1 from the first kick at which either edge
    criterion fires, i.e. when the ``N`` harmonics no longer hold the state.
    Records at ``snapshot_kicks`` carry ``profiles``:
    ``{"psi": (x, |psi|), "A": (k, |A_k|)}``.
    """
    cfg.validate()
    snapshots = sorted(set(cfg.snapshot_kicks if snapshot_kicks is None else snapshot_kicks))
    n_total = max([cfg.n_kicks, *snapshots])

    def one(K):
        params = derive_params(K, cfg.sigma, cfg.hbar)
        out = []
        overflow = False
        for n, state, report in evolve(initial_state(cfg, cfg.sigma), params, n_total,
                                       cfg.epsilon, terminate=False):
            overflow = overflow or not report.localized
            rec = _measure(n, K, cfg.sigma, state, params, report)
            abs_psi = np.abs(state.amplitudes)
            rec.extra.update(
                subpackets=count_subpackets(abs_psi),
                edge_ratio_p=report.edge_ratio_p,
                edge_ratio_x=report.edge_ratio_x,
                overflow=int(overflow),
            )
            rec.extra.setdefault("degenerate", NAN)
            if n in snapshots:
                amps = forward_transform(state)
                rec.profiles = {"psi": (state.grid.x, abs_psi), "A": (amps.k, np.abs(amps.amps))}
            out.append(rec)
        return out

    return _map_k(one, cfg.K_grid, cfg.threads)


@dataclass
class OracleReport:
    passed: bool
    max_deviation: float
    worst_k: int
    worst_n: int
    band: int
    threshold: float
    per_kick: list = field(default_factory=list)

    def describe(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict}: max |A_fft - A_bessel| = {self.max_deviation:.3e} "
                f"(threshold {self.threshold:g}) at k={self.worst_k}, kick {self.worst_n}, band={self.band}")


def run_oracle_check(cfg: ExperimentConfig, threshold: float = 1e-10) -> OracleReport:
    """Compare the spectral map with the Bessel-matrix map on a small grid."""
    cfg.validate()
    params = SimParams.from_map(cfg.oracle_alpha, cfg.oracle_beta, cfg.oracle_hbar, cfg.oracle_sigma)
    band = cfg.oracle_band if cfg.oracle_band > 0 else default_band(params)
    grid = Grid(cfg.oracle_n_points)
    state = gaussian_packet(grid, GaussianSpec(cfg.oracle_x0, cfg.oracle_k0, cfg.oracle_sigma))
    amps = forward_transform(state)
    k_window = amps.k_offset
    worst = (0.0, 0, 0)
    per_kick = []
    for n in range(1, cfg.oracle_kicks + 1):
        state = kick_step(state, params, enforce_localized=False)
        amps = bessel_propagate(amps, params, band, strict=False)
        spectral = forward_transform(state, k_window)
        dev = np.abs(spectral.amps - amps.amps)
        i = int(np.argmax(dev))
        per_kick.append((n, float(dev[i]), int(k_window + i), amps.norm()))
        if n == 1 or dev[i] > worst[0]:
            worst = (float(dev[i]), int(k_window + i), n)
    return OracleReport(worst[0] < threshold, worst[0], worst[1], worst[2], band, threshold, per_kick)


def correlation(records: Sequence[ExperimentRecord], x: str = "ln_S", y: str = "ln_d"):
    """Pearson and Spearman coefficients over the localized records.

    Returns ``(pearson_r, spearman_rho, count)``.
    """
    pairs = [(getattr(r, x) if hasattr(r, x) else r.extra[x],
              getattr(r, y) if hasattr(r, y) else r.extra[y])
             for r in records if not r.delocalized]
    arr = np.array([p for p in pairs if all(math.isfinite(v) for v in p)], dtype=float)
    if arr.shape[0] < 3:
        return NAN, NAN, int(arr.shape[0])
    return float(pearsonr(arr[:, 0], arr[:, 1])[0]), float(spearmanr(arr[:, 0], arr[:, 1])[0]), int(arr.shape[0])


def delocalization_boundary(records: Sequence[ExperimentRecord]) -> float | None:
    """Smallest K whose record is flagged as delocalized, or ``None``."""
    flagged = [r.K for r in records if r.delocalized]
    return min(flagged) if flagged else None


def overflow_kick(records: Sequence[ExperimentRecord]) -> int | None:
    flagged = [r.n for r in records if r.extra.get("overflow")]
    return min(flagged) if flagged else None
