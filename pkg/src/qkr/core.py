"""Parameters, grids and initial states for the quantum kicked rotator.

The wave function lives on ``N = 2**m`` equally spaced points of the circle.
Amplitudes are stored in ascending order of the coordinate of the active
window, ``x_l = start + l * dx`` with ``start`` equal to ``0`` or ``-pi``.
Position integrals are approximated by ``dx``-weighted sums, so a normalized
state satisfies ``sum(|psi_l|**2) * dx == 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2.0 * math.pi
MAX_SIGMA = 0.3
MIN_POINTS_PER_SIGMA = 4


class QKRError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QKRError, ValueError):
    """A physical parameter lies outside its admissible range."""


class ResolutionError(QKRError, ValueError):
    """The grid cannot resolve the requested wave packet."""


class Window(enum.Enum):
    ZERO_TO_TWO_PI = "0..2pi"
    MINUS_PI_TO_PI = "-pi..pi"

    @property
    def start(self) -> float:
        return 0.0 if self is Window.ZERO_TO_TWO_PI else -math.pi

    @property
    def other(self) -> "Window":
        if self is Window.ZERO_TO_TWO_PI:
            return Window.MINUS_PI_TO_PI
        return Window.ZERO_TO_TWO_PI

    def contains(self, x: float) -> bool:
        return self.start <= x < self.start + TWO_PI


@dataclass(frozen=True)
class SimParams:
    """Control parameters of the quantum map and its classical limit.

    ``alpha`` is the kick strength and ``beta`` the inverse inertia, both in
    units where the kick period is one; ``K = alpha * beta`` is the Chirikov
    parameter and ``gamma = sqrt(alpha / beta)`` sets the oscillator scale used
    to build the annihilation operator.
    """

    K: float
    alpha: float
    beta: float
    hbar: float
    gamma: float
    sigma: float

    def __post_init__(self):
        for name in ("hbar", "gamma", "sigma"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        # alpha = 0 or beta = 0 switch off one half of the map; used by checks
        for name in ("K", "alpha", "beta"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be non-negative and finite, got {value!r}")

    @classmethod
    def from_map(cls, alpha: float, beta: float, hbar: float, sigma: float) -> "SimParams":
        """Build parameters from the map constants directly.

        When either constant vanishes ``gamma`` falls back to the value that
        makes a packet of width ``sigma`` coherent.
        """
        if alpha > 0 and beta > 0:
            gamma = math.sqrt(alpha / beta)
        else:
            gamma = hbar / (2.0 * sigma**2)
        return cls(K=alpha * beta, alpha=alpha, beta=beta, hbar=hbar, gamma=gamma, sigma=sigma)

    @property
    def levels_per_kick(self) -> float:
        """Approximate number of unperturbed levels coupled by one kick, ``2 alpha / hbar``."""
        return 2.0 * self.alpha / self.hbar


def derive_params(K: float, sigma: float, hbar: float) -> SimParams:
    """Choose ``alpha`` and ``beta`` so that a packet of width ``sigma`` is coherent.

    Combines ``K = alpha * beta`` with the coherent-state condition
    ``sigma**2 = hbar / (2 gamma)``.

    >>> p = derive_params(1.0, 0.1, 0.02)
    >>> round(p.alpha, 12), round(p.beta, 12), round(p.gamma, 12)
    (1.0, 1.0, 1.0)
    """
    for name, value in (("K", K), ("sigma", sigma), ("hbar", hbar)):
        if not (value > 0 and math.isfinite(value)):
            raise DomainError(f"{name} must be positive and finite, got {value!r}")
    if sigma >= MAX_SIGMA:
        raise DomainError(f"sigma must be < {MAX_SIGMA}, got {sigma!r}")
    root_k = math.sqrt(K)
    width = 2.0 * sigma * sigma
    return SimParams(
        K=K,
        alpha=root_k * hbar / width,
        beta=root_k * width / hbar,
        hbar=hbar,
        gamma=hbar / width,
        sigma=sigma,
    )


@dataclass(frozen=True)
class Grid:
    n_points: int
    window: Window = Window.ZERO_TO_TWO_PI

    def __post_init__(self):
        n = self.n_points
        if not (isinstance(n, (int, np.integer)) and n >= 8 and n & (n - 1) == 0):
            raise DomainError(f"n_points must be a power of two >= 8, got {n!r}")

    @property
    def dx(self) -> float:
        return TWO_PI / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.window.start + self.dx * np.arange(self.n_points)

    def with_window(self, window: Window) -> "Grid":
        return replace(self, window=window)


@dataclass(frozen=True)
class GaussianSpec:
    x0: float
    k0: int
    sigma: float

    def __post_init__(self):
        if int(self.k0) != self.k0:
            raise DomainError(f"k0 must be an integer, got {self.k0!r}")
        object.__setattr__(self, "k0", int(self.k0))
        if not (0 < self.sigma < MAX_SIGMA):
            raise DomainError(f"sigma must lie in (0, {MAX_SIGMA}), got {self.sigma!r}")


@dataclass
class QuantumState:
    """Position amplitudes plus the bookkeeping of both representation windows.

    Momentum labels of the current window are ``k_offset ... k_offset + N - 1``.
    The position samples fix the momentum amplitudes only modulo ``N``;
    ``k_offset`` chooses which representatives are physical.
    """

    amplitudes: np.ndarray
    grid: Grid
    k_offset: int
    kick_count: int = 0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} amplitudes, got shape {self.amplitudes.shape}"
            )
        self.k_offset = int(self.k_offset)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def k(self) -> np.ndarray:
        return self.k_offset + np.arange(self.grid.n_points, dtype=np.int64)

    def copy(self) -> "QuantumState":
        return QuantumState(self.amplitudes.copy(), self.grid, self.k_offset, self.kick_count)


@dataclass(frozen=True)
class CumulantSet:
    """First and second cumulants of ``x`` and ``p``.

    ``c`` is the symmetrized cross-correlator ``<(xp + px)/2> - <x><p>``.
    """

    mean_x: float
    var_x: float
    mean_p: float
    var_p: float
    c: float
    hbar: float = field(default=float("nan"), compare=False)

    @property
    def uncertainty_determinant(self) -> float:
        return self.var_x * self.var_p - self.c * self.c

    def satisfies_uncertainty(self, tol: float = 1e-6) -> bool:
        return self.uncertainty_determinant >= 0.25 * self.hbar**2 * (1.0 - tol)


def _wrap(u: np.ndarray) -> np.ndarray:
    """Map displacements onto [-pi, pi)."""
    return np.mod(u + math.pi, TWO_PI) - math.pi


def gaussian_packet(grid: Grid, spec: GaussianSpec) -> QuantumState:
    """Sample a Gaussian packet centred at ``x0`` with mean momentum label ``k0``.

    Each grid point takes the displacement to the nearest image of ``x0``; for
    ``sigma < 0.3`` the far images contribute below round-off, so no explicit
    sum over images is needed.  The samples are renormalized discretely and
    the momentum window is centred on ``k0``.
    """
    if not grid.window.contains(spec.x0):
        raise DomainError(f"x0={spec.x0!r} lies outside the {grid.window.value} window")
    if spec.sigma < MIN_POINTS_PER_SIGMA * grid.dx:
        raise ResolutionError(
            f"sigma={spec.sigma!r} is under-resolved: need sigma >= "
            f"{MIN_POINTS_PER_SIGMA}*dx = {MIN_POINTS_PER_SIGMA * grid.dx:.3g}"
        )
    u = _wrap(grid.x - spec.x0)
    envelope = np.exp(-(u * u) / (4.0 * spec.sigma**2))
    psi = envelope * np.exp(1j * spec.k0 * u) * (TWO_PI * spec.sigma**2) ** -0.25
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return QuantumState(psi, grid, spec.k0 - grid.n_points // 2, 0)


def discrete_norm(state: QuantumState) -> float:
    """Return ``sqrt(sum |psi_l|^2 dx)``."""
    return math.sqrt(float(np.sum(np.abs(state.amplitudes) ** 2)) * state.grid.dx)
