"""One-period evolution of the kicked rotator and its bookkeeping.

The map ``psi -> U_x F^-1 U_p F psi`` is applied spectrally: the free rotation
is diagonal in the momentum labels ``k``, the kick is diagonal on the position
grid.  Momentum amplitudes follow the continuum convention

    A_k = (2 pi)^-1/2 * integral psi(x) exp(-i k x) dx

evaluated with the rectangle rule, which makes the transform unitary between
the ``dx``-weighted position norm and the plain momentum norm.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from . import kernels
from .core import QKRError, QuantumState, SimParams, Window

DEFAULT_EPSILON = 0.002
BESSEL_MARGIN = 40


class EvolutionTerminated(QKRError):
    """Raised when asked to evolve a state that is no longer localized."""

    def __init__(self, report: "DelocalizationReport"):
        super().__init__(
            f"wave packet delocalized ({report.status.value}): "
            f"edge ratios p={report.edge_ratio_p:.3g}, x={report.edge_ratio_x:.3g}, "
            f"epsilon={report.epsilon}"
        )
        self.report = report


class TruncationError(QKRError):
    """The Bessel band is too narrow to keep the map unitary."""


class Status(enum.Enum):
    LOCALIZED = "localized"
    EDGE_IN_MOMENTUM = "edge-in-momentum"
    EDGE_IN_POSITION = "edge-in-position"


@dataclass
class MomentumAmplitudes:
    amps: np.ndarray
    k_offset: int

    @property
    def k(self) -> np.ndarray:
        return self.k_offset + np.arange(self.amps.shape[0], dtype=np.int64)

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.amps) ** 2)))


@dataclass(frozen=True)
class DelocalizationReport:
    status: Status
    edge_ratio_p: float
    edge_ratio_x: float
    epsilon: float

    @property
    def localized(self) -> bool:
        return self.status is Status.LOCALIZED


def _window_signs(k: np.ndarray, window: Window) -> np.ndarray:
    # exp(-i k start) for start in {0, -pi} is exactly (+1) or (-1)**k
    if window is Window.ZERO_TO_TWO_PI:
        return np.ones(k.shape[0])
    return np.where(k % 2 == 0, 1.0, -1.0)


def forward_transform(state: QuantumState, k_offset: int | None = None) -> MomentumAmplitudes:
    """Momentum amplitudes on the window starting at ``k_offset`` (default: the state's)."""
    grid = state.grid
    n = grid.n_points
    k_offset = state.k_offset if k_offset is None else int(k_offset)
    spectrum = scipy.fft.fft(state.amplitudes)
    amps = np.roll(spectrum, -(k_offset % n))
    k = k_offset + np.arange(n, dtype=np.int64)
    amps *= _window_signs(k, grid.window) * (grid.dx / math.sqrt(2.0 * math.pi))
    return MomentumAmplitudes(amps, k_offset)


def inverse_transform(amps: MomentumAmplitudes, grid, kick_count: int = 0) -> QuantumState:
    n = grid.n_points
    if amps.amps.shape != (n,):
        raise ValueError("amplitude array does not match the grid")
    shifted = amps.amps * _window_signs(amps.k, grid.window)
    spectrum = np.roll(shifted, amps.k_offset % n)
    psi = scipy.fft.ifft(spectrum) * (math.sqrt(2.0 * math.pi) / grid.dx)
    return QuantumState(psi, grid, amps.k_offset, kick_count)


@functools.lru_cache(maxsize=16)
def _kick_phase(alpha_over_hbar: float, n_points: int, window: Window) -> np.ndarray:
    x = window.start + (2.0 * math.pi / n_points) * np.arange(n_points)
    phase = np.exp(1j * alpha_over_hbar * np.cos(x))
    phase.setflags(write=False)
    return phase


def free_phase(k: np.ndarray, params: SimParams) -> np.ndarray:
    """``exp(-i beta hbar k^2 / 2)`` for absolute momentum labels ``k``."""
    # k**2 is exact in float64 for |k| < 9e7
    k2 = k.astype(np.float64) ** 2
    return np.exp(-0.5j * params.beta * params.hbar * k2)


def check_delocalization(state: QuantumState, epsilon: float = DEFAULT_EPSILON,
                         amps: MomentumAmplitudes | None = None) -> DelocalizationReport:
    """Compare the amplitudes at both window edges with the peak values.

    The momentum test uses the first and last label of the current window; the
    position test uses the boundary point of the active interval (``x = 0`` on
    ``[0, 2pi)``, ``x = -pi`` on ``[-pi, pi)``), which is sample 0 in both cases.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if amps is None:
        amps = forward_transform(state)
    abs_a = np.abs(amps.amps)
    abs_psi = np.abs(state.amplitudes)
    chi = abs_a.max()
    xi = abs_psi.max()
    ratio_p = max(abs_a[0], abs_a[-1]) / chi if chi > 0 else math.inf
    ratio_x = abs_psi[0] / xi if xi > 0 else math.inf
    status = Status.LOCALIZED
    if max(ratio_p, ratio_x) > epsilon:
        status = Status.EDGE_IN_MOMENTUM if ratio_p >= ratio_x else Status.EDGE_IN_POSITION
    return DelocalizationReport(status, float(ratio_p), float(ratio_x), epsilon)


def recenter_momentum(state: QuantumState) -> QuantumState:
    """Relabel the momentum window so the largest ``|A_k|`` sits at index ``N/2``.

    Position amplitudes are untouched: only the choice of physical
    representatives for the labels changes.
    """
    amps = forward_transform(state)
    peak = int(np.argmax(np.abs(amps.amps)))
    shift = peak - state.grid.n_points // 2
    if shift == 0:
        return state
    return QuantumState(state.amplitudes, state.grid, state.k_offset + shift, state.kick_count)


def switch_position_window(state: QuantumState) -> QuantumState:
    """Move to the other position window when the density peak nears a boundary.

    The trigger is a peak within ``pi/2`` of the active window's boundary. The
    two windows share their grid points, so the switch is a cyclic shift by
    ``N/2`` samples.
    """
    grid = state.grid
    x_peak = grid.x[int(np.argmax(np.abs(state.amplitudes)))]
    start = grid.window.start
    quarter = 0.5 * math.pi
    if quarter <= x_peak - start < 2.0 * math.pi - quarter:
        return state
    return change_window(state)


def change_window(state: QuantumState) -> QuantumState:
    """Re-express the state on the other position window unconditionally."""
    grid = state.grid
    psi = np.roll(state.amplitudes, grid.n_points // 2)
    return QuantumState(psi, grid.with_window(grid.window.other), state.k_offset, state.kick_count)


def kick_step(state: QuantumState, params: SimParams, *, epsilon: float = DEFAULT_EPSILON,
              enforce_localized: bool = True) -> QuantumState:
    """Advance the state by one period: free rotation, then the kick.

    Recentering of the momentum window and the position-window switch are
    applied afterwards.  With ``enforce_localized`` a delocalized input raises
    :class:`EvolutionTerminated`.
    """
    amps = forward_transform(state)
    if enforce_localized:
        report = check_delocalization(state, epsilon, amps)
        if not report.localized:
            raise EvolutionTerminated(report)
    amps.amps *= free_phase(amps.k, params)
    grid = state.grid
    out = inverse_transform(amps, grid, state.kick_count + 1)
    out.amplitudes *= _kick_phase(params.alpha / params.hbar, grid.n_points, grid.window)
    return switch_position_window(recenter_momentum(out))


def default_band(params: SimParams) -> int:
    return int(math.ceil(params.alpha / params.hbar)) + BESSEL_MARGIN


def bessel_coefficients(z: float, band: int) -> np.ndarray:
    """Kick matrix elements ``i^l J_l(z)`` for ``l = -band..band``.

    Row ``k`` of the kick couples to column ``m`` through ``l = k - m``.
    """
    j = kernels.bessel_jn_array(z, band)
    l = np.arange(-band, band + 1)
    jl = j[np.abs(l)] * np.where((l < 0) & (l % 2 == 1), -1.0, 1.0)
    return (1j ** (l % 4)) * jl


def bessel_propagate(amps: MomentumAmplitudes, params: SimParams, band: int | None = None,
                     *, strict: bool = True) -> MomentumAmplitudes:
    """One period of the map written directly on the momentum amplitudes.

    ``A'_k = sum_m i^(k-m) J_(k-m)(alpha/hbar) exp(-i hbar beta m^2 / 2) A_m``,
    truncated to ``|k - m| <= band``; amplitudes outside the label window are
    taken as zero.  Intended for small windows as an independent check of
    :func:`kick_step`.
    """
    if band is None:
        band = default_band(params)
    band = int(band)
    if band < 0:
        raise ValueError("band must be non-negative")
    coef = bessel_coefficients(params.alpha / params.hbar, band)
    rotated = amps.amps * free_phase(amps.k, params)
    new = kernels.banded_apply(rotated, coef)
    out = MomentumAmplitudes(new, amps.k_offset)
    if strict:
        before, after = amps.norm(), out.norm()
        if abs(after - before) > 1e-6 * max(before, 1e-300):
            raise TruncationError(
                f"norm drifted from {before:.12g} to {after:.12g}; band={band} is too narrow "
                f"for alpha/hbar={params.alpha / params.hbar:.6g}"
            )
    return out
