"""The standard map, its tangent dynamics and instability measures.

States are taken immediately after a kick, so one step first rotates freely
and then kicks::

    x' = (x + P) mod 2pi
    P' = P - K sin x'

``P = beta p`` is the scaled momentum.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ClassicalState:
    x: float
    P: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x) % TWO_PI)


@dataclass(frozen=True)
class TangentState:
    dx: float
    dP: float

    @property
    def length(self) -> float:
        return math.hypot(self.dx, self.dP)


class FixedPointType(enum.Enum):
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"


def map_step(s: ClassicalState, K: float) -> ClassicalState:
    x = (s.x + s.P) % TWO_PI
    return ClassicalState(x, s.P - K * math.sin(x))


def inverse_map_step(s: ClassicalState, K: float) -> ClassicalState:
    P = s.P + K * math.sin(s.x)
    return ClassicalState(s.x - P, P)


def jacobian(x_new: float, K: float) -> np.ndarray:
    """Tangent map of one step, evaluated at the post-step angle ``x_new``."""
    kc = K * math.cos(x_new)
    return np.array([[1.0, 1.0], [-kc, 1.0 - kc]])


def tangent_step(s: ClassicalState, t: TangentState, K: float) -> TangentState:
    """Propagate the displacement ``t`` attached to ``s`` (the state before the step)."""
    x_new = (s.x + s.P) % TWO_PI
    dx = t.dx + t.dP
    return TangentState(dx, t.dP - K * math.cos(x_new) * dx)


def classify_fixed_point(x: float, K: float) -> FixedPointType:
    """Linear type of the fixed point ``(x, 0)`` with ``x`` in ``{0, pi}``."""
    trace = float(np.trace(jacobian(x, K)))
    if abs(trace) < 2.0 - 1e-12:
        return FixedPointType.ELLIPTIC
    if abs(trace) > 2.0 + 1e-12:
        return FixedPointType.HYPERBOLIC
    return FixedPointType.PARABOLIC


def trajectory(s0: ClassicalState, K: float, n: int) -> np.ndarray:
    """Rows ``(x_i, P_i)`` for ``i = 0..n``."""
    return kernels.orbit(s0.x, s0.P, float(K), int(n))


def dcl_series(s0: ClassicalState, t0: TangentState, K: float, n: int,
               p_scale: float = 1.0) -> np.ndarray:
    """Tangent-vector length ``d_cl`` after each of ``n`` kicks (index 0 is ``|t0|``).

    ``p_scale`` divides the momentum component before measuring the length,
    e.g. ``beta`` to measure in unscaled ``(x, p)`` units.
    """
    if t0.length == 0:
        raise ValueError("initial tangent vector must be non-zero")
    rows = kernels.tangent_orbit(s0.x, s0.P, t0.dx, t0.dP, float(K), int(n))
    return np.hypot(rows[:, 2], rows[:, 3] / p_scale)


def local_exponent(s0: ClassicalState, K: float, n: int,
                   t0: TangentState = TangentState(1.0, 0.0)) -> float:
    """Finite-time growth rate ``h = ln(d_cl(n) / d_cl(0)) / n``."""
    if not 1 <= n <= 20:
        raise ValueError("local_exponent is meant for 1 <= n <= 20 kicks")
    d = dcl_series(s0, t0, K, n)
    return math.log(d[-1] / d[0]) / n


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    per_seed: np.ndarray
    regular: bool


def lyapunov_ensemble(K: float, n: int = 5000, ensemble: int = 16, seed: int = 12345,
                      renorm_every: int = 10) -> LyapunovEstimate:
    """Largest Lyapunov exponent as the median over random initial points.

    Seeds are drawn uniformly from ``[0, 2pi)^2`` with a fixed generator so the
    estimate is reproducible.  ``regular`` is set when ``K < 1`` and no seed
    shows a rate distinguishable from the ``ln(n)/n`` of linear shear.
    """
    if n < 1000:
        raise ValueError("need n >= 1000 kicks for an asymptotic estimate")
    if ensemble < 10:
        raise ValueError("need an ensemble of at least 10 seeds")
    rng = np.random.default_rng(seed)
    starts = rng.uniform(0.0, TWO_PI, size=(ensemble, 2))
    rates = np.array([
        kernels.lyapunov_log_growth(x, P, float(K), int(n), int(renorm_every)) / n
        for x, P in starts
    ])
    value = float(np.median(rates))
    regular = bool(K < 1.0 and np.all(rates < 10.0 * math.log(n) / n))
    if regular:
        warnings.warn(f"K={K}: median Lyapunov exponent {value:.3g} is consistent with "
                      "regular motion for every seed", RuntimeWarning, stacklevel=2)
    return LyapunovEstimate(value, rates, regular)


def lyapunov(K: float, n: int = 5000, ensemble: int = 16, seed: int = 12345) -> float:
    return lyapunov_ensemble(K, n, ensemble, seed).value


def phase_portrait(K: float, seeds: Iterable[ClassicalState], n: int) -> list[np.ndarray]:
    """Orbit of each seed as an ``(n + 1, 2)`` array, ``x`` in ``[0, 2pi)``, ``P`` in ``[-pi, pi)``.

    Folding ``P`` as well is valid because the map is ``2pi``-periodic in ``P``.
    """
    clouds = []
    for s in seeds:
        pts = trajectory(s, K, n)
        pts[:, 1] = np.mod(pts[:, 1] + math.pi, TWO_PI) - math.pi
        clouds.append(pts)
    return clouds


def seed_line(x: float, P_values: Sequence[float]) -> list[ClassicalState]:
    return [ClassicalState(x, P) for P in P_values]
