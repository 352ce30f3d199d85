"""Moments, principal squeezing and the optimal homodyne phase.

With ``a = (sqrt(gamma) x + i p / sqrt(gamma)) / sqrt(2 hbar)`` the quadrature
``X_theta = a exp(-i theta) + a^+ exp(i theta)`` has variance

    <dX_theta^2> = [A + B + (A - B) cos 2theta + 2c sin 2theta] / hbar,

where ``A = gamma var_x`` and ``B = var_p / gamma``.  Its minimum over theta is
the principal squeezing ``S`` and its maximum the dilation ``S_bar``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CumulantSet, QKRError, QuantumState, SimParams
from .propagator import DEFAULT_EPSILON, check_delocalization, forward_transform, inverse_transform

DEGENERACY_THRESHOLD = 1e-14


class MomentUndefinedError(QKRError):
    """Moments were requested for a state that is not localized on its windows."""


@dataclass(frozen=True)
class SqueezingRecord:
    S: float
    S_bar: float
    theta_star: float
    quad_var_0: float
    quad_var_half_pi: float
    d: float
    degenerate_phase: bool


def cumulants(state: QuantumState, hbar: float, *, epsilon: float = DEFAULT_EPSILON,
              check: bool = True) -> CumulantSet:
    """First and second cumulants of ``x`` and ``p = hbar k``.

    Position moments use the coordinates of the active window; momentum
    moments use absolute labels.  The cross-correlator is
    ``Re <psi| dx F^-1 dp F |psi>`` with centred operators, which equals the
    symmetrized form because both operators are Hermitian.
    """
    amps = forward_transform(state)
    if check:
        report = check_delocalization(state, epsilon, amps)
        if not report.localized:
            raise MomentUndefinedError(
                f"state is delocalized ({report.status.value}); moments are meaningless"
            )
    dx = state.grid.dx
    psi = state.amplitudes
    x = state.grid.x
    rho = np.abs(psi) ** 2 * dx
    w = np.abs(amps.amps) ** 2
    norm_x = rho.sum()
    norm_p = w.sum()
    mean_x = float(np.dot(x, rho) / norm_x)
    xc = x - mean_x
    var_x = float(np.dot(xc * xc, rho) / norm_x)
    p = hbar * amps.k.astype(np.float64)
    mean_p = float(np.dot(p, w) / norm_p)
    pc = p - mean_p
    var_p = float(np.dot(pc * pc, w) / norm_p)
    amps.amps *= pc
    p_psi = inverse_transform(amps, state.grid).amplitudes
    c = float(np.real(np.vdot(psi, xc * p_psi)) * dx / norm_x)
    return CumulantSet(mean_x, var_x, mean_p, var_p, c, hbar)


def _scaled(cums: CumulantSet, params: SimParams):
    return params.gamma * cums.var_x, cums.var_p / params.gamma


def principal_squeezing(cums: CumulantSet, params: SimParams) -> tuple[float, float]:
    """Return ``(S, S_bar)``, the extrema of the quadrature variance over the phase."""
    a, b = _scaled(cums, params)
    root = math.hypot(a - b, 2.0 * cums.c)
    s_bar = (a + b + root) / params.hbar
    s = (a + b - root) / params.hbar
    return max(s, 0.0), s_bar


def delta_a_squared(cums: CumulantSet, params: SimParams) -> complex:
    """``<(a - <a>)^2>`` expressed through the cumulants."""
    a, b = _scaled(cums, params)
    return complex(a - b, 2.0 * cums.c) / (2.0 * params.hbar)


def delta_a_dagger_a(cums: CumulantSet, params: SimParams) -> float:
    """``<(a - <a>)^+ (a - <a>)>``; zero for a coherent state."""
    a, b = _scaled(cums, params)
    return (a + b) / (2.0 * params.hbar) - 0.5


def _as_cumulants(obj, params: SimParams) -> CumulantSet:
    if isinstance(obj, CumulantSet):
        return obj
    return cumulants(obj, params.hbar)


def quadrature_variance(state, theta, params: SimParams):
    """``<dX_theta^2> = 1 + 2<da^+ da> + 2 Re(exp(-2i theta) <da^2>)``.

    ``state`` may be a :class:`QuantumState` or a precomputed
    :class:`CumulantSet`; ``theta`` may be an array.
    """
    cums = _as_cumulants(state, params)
    n_term = 1.0 + 2.0 * delta_a_dagger_a(cums, params)
    da2 = delta_a_squared(cums, params)
    theta = np.asarray(theta, dtype=float)
    out = n_term + 2.0 * np.real(np.exp(-2j * theta) * da2)
    return float(out) if out.ndim == 0 else out


def optimal_phase(state, params: SimParams) -> tuple[float, bool]:
    """Phase in ``[0, pi)`` that minimizes the quadrature variance.

    Uses ``exp(2i theta*) = -(<da^2>/<da^+2>)^(1/2)`` with the principal root;
    when that branch lands on the maximum the result is moved by ``pi/2``.
    Returns ``(0.0, True)`` when ``|<da^2>|`` is below round-off, since every
    phase is then optimal.
    """
    cums = _as_cumulants(state, params)
    da2 = delta_a_squared(cums, params)
    if abs(da2) < DEGENERACY_THRESHOLD:
        return 0.0, True
    ratio = da2 / da2.conjugate()
    e2 = -np.sqrt(ratio)
    theta = (0.5 * math.atan2(e2.imag, e2.real)) % math.pi
    alt = (theta + 0.5 * math.pi) % math.pi
    if quadrature_variance(cums, alt, params) < quadrature_variance(cums, theta, params):
        theta = alt
    return float(theta), False


def spread_distance(cums: CumulantSet) -> float:
    """``d = (var_x + var_p)^(1/2)``, mixing the position and momentum units as given."""
    return math.sqrt(cums.var_x + cums.var_p)


def squeezing_record(state, params: SimParams) -> SqueezingRecord:
    cums = _as_cumulants(state, params)
    s, s_bar = principal_squeezing(cums, params)
    theta, degenerate = optimal_phase(cums, params)
    return SqueezingRecord(
        S=s,
        S_bar=s_bar,
        theta_star=theta,
        quad_var_0=quadrature_variance(cums, 0.0, params),
        quad_var_half_pi=quadrature_variance(cums, 0.5 * math.pi, params),
        d=spread_distance(cums),
        degenerate_phase=degenerate,
    )
