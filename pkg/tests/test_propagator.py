import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkr.core import GaussianSpec, Grid, QuantumState, SimParams, Window, derive_params, discrete_norm, gaussian_packet
from qkr.propagator import (
    EvolutionTerminated,
    MomentumAmplitudes,
    Status,
    TruncationError,
    bessel_coefficients,
    bessel_propagate,
    change_window,
    check_delocalization,
    default_band,
    forward_transform,
    free_phase,
    inverse_transform,
    kick_step,
    recenter_momentum,
    switch_position_window,
)


def _plane_wave(grid, k):
    psi = np.exp(1j * k * grid.x) / math.sqrt(2 * math.pi)
    return QuantumState(psi, grid, -grid.n_points // 2)


@pytest.mark.parametrize("window", list(Window))
@pytest.mark.parametrize("k", [-5, 0, 3, 17])
def test_forward_transform_of_plane_wave(window, k):
    grid = Grid(64, window)
    amps = forward_transform(_plane_wave(grid, k))
    expected = np.zeros(64, complex)
    expected[k + 32] = 1.0
    np.testing.assert_allclose(amps.amps, expected, atol=1e-13)


def test_forward_transform_matches_quadrature():
    # direct sum of (dx / sqrt(2 pi)) psi(x) exp(-i k x) over the grid
    grid = Grid(128, Window.MINUS_PI_TO_PI)
    state = gaussian_packet(grid, GaussianSpec(0.3, 4, 0.2))
    amps = forward_transform(state, k_offset=-20)
    k = np.arange(-20, 108)
    direct = (grid.dx / math.sqrt(2 * math.pi)) * np.exp(-1j * np.outer(k, grid.x)) @ state.amplitudes
    np.testing.assert_allclose(amps.amps, direct, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), offset=st.integers(-10_000, 10_000),
       window=st.sampled_from(list(Window)))
def test_transform_round_trip_and_parseval(seed, offset, window):
    rng = np.random.default_rng(seed)
    grid = Grid(256, window)
    psi = rng.normal(size=256) + 1j * rng.normal(size=256)
    state = QuantumState(psi, grid, offset)
    amps = forward_transform(state)
    assert amps.norm() == pytest.approx(discrete_norm(state), rel=1e-12)
    back = inverse_transform(amps, grid)
    np.testing.assert_allclose(back.amplitudes, psi, atol=1e-12)
    assert back.k_offset == offset


def test_free_phase_unimodular():
    p = derive_params(1.0, 0.006, 1e-6)
    k = np.arange(-50_000, 50_000, 37)
    np.testing.assert_allclose(np.abs(free_phase(k, p)), 1.0)


def test_check_delocalization_states():
    grid = Grid(1024)
    state = gaussian_packet(grid, GaussianSpec(math.pi, 0, 0.1))
    rep = check_delocalization(state)
    assert rep.status is Status.LOCALIZED and rep.localized
    near_edge = gaussian_packet(grid, GaussianSpec(0.2, 0, 0.1))
    assert check_delocalization(near_edge).status is Status.EDGE_IN_POSITION
    plane = _plane_wave(grid, 511)
    assert check_delocalization(plane).status is Status.EDGE_IN_MOMENTUM
    with pytest.raises(ValueError):
        check_delocalization(state, 0.0)


def test_recenter_momentum_keeps_physics():
    grid = Grid(256)
    state = gaussian_packet(grid, GaussianSpec(math.pi, 40, 0.1))
    shifted = QuantumState(state.amplitudes, grid, state.k_offset - 30)
    out = recenter_momentum(shifted)
    assert out.k_offset == state.k_offset
    amps = forward_transform(out)
    assert amps.k[np.argmax(np.abs(amps.amps))] == 40
    np.testing.assert_array_equal(out.amplitudes, shifted.amplitudes)


def test_switch_window_only_near_boundary():
    grid = Grid(512)
    centred = gaussian_packet(grid, GaussianSpec(math.pi, 0, 0.1))
    assert switch_position_window(centred) is centred
    edge = gaussian_packet(grid, GaussianSpec(0.9, 0, 0.1))
    moved = switch_position_window(edge)
    assert moved.grid.window is Window.MINUS_PI_TO_PI
    # the same physical function, sampled on the other window
    i = np.argmax(np.abs(moved.amplitudes))
    assert moved.grid.x[i] == pytest.approx(grid.x[np.argmax(np.abs(edge.amplitudes))])
    np.testing.assert_allclose(forward_transform(moved).amps, forward_transform(edge).amps, atol=1e-13)
    np.testing.assert_array_equal(change_window(moved).amplitudes, edge.amplitudes)


def test_kick_step_unitary_and_bookkeeping():
    p = derive_params(0.8, 0.006, 1e-6)
    state = gaussian_packet(Grid(2**15), GaussianSpec(math.pi, 10_000, 0.006))
    out = kick_step(state, p)
    assert out.kick_count == 1
    assert discrete_norm(out) == pytest.approx(1.0, abs=1e-12)


def test_kick_step_refuses_delocalized_state():
    grid = Grid(256)
    state = gaussian_packet(grid, GaussianSpec(0.1, 0, 0.1))
    with pytest.raises(EvolutionTerminated) as info:
        kick_step(state, SimParams.from_map(1.0, 1.0, 1.0, 0.1))
    assert info.value.report.status is Status.EDGE_IN_POSITION
    kick_step(state, SimParams.from_map(1.0, 1.0, 1.0, 0.1), enforce_localized=False)


def test_free_rotation_of_plane_wave():
    # alpha = 0: a momentum eigenstate only picks up exp(-i beta hbar k^2 / 2)
    grid = Grid(64)
    params = SimParams.from_map(0.0, 0.7, 0.3, 0.2)
    state = _plane_wave(grid, 5)
    out = kick_step(state, params, enforce_localized=False)
    expected = np.exp(5j * out.grid.x) / math.sqrt(2 * math.pi) * np.exp(-0.5j * 0.7 * 0.3 * 25)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-13)


@pytest.mark.parametrize("z", [0.5, 3.0, 12.0])
def test_bessel_coefficients_jacobi_anger(z):
    # exp(i z cos x) = sum_l i^l J_l(z) exp(i l x)
    band = int(z) + 40
    coef = bessel_coefficients(z, band)
    x = np.linspace(0, 2 * math.pi, 17)
    series = np.exp(1j * np.outer(x, np.arange(-band, band + 1))) @ coef
    np.testing.assert_allclose(series, np.exp(1j * z * np.cos(x)), atol=1e-13)
    # columns of the kick matrix are unit vectors
    assert np.sum(np.abs(coef) ** 2) == pytest.approx(1.0, abs=1e-10)


ORACLE_PARAMS = [(2.0, 0.5, 1.0), (5.0, 0.3, 1.0), (0.7, 1.9, 0.5), (3.0, 1.0, 2.0)]


@pytest.mark.parametrize("alpha, beta, hbar", ORACLE_PARAMS)
def test_spectral_map_matches_bessel_map(alpha, beta, hbar):
    params = SimParams.from_map(alpha, beta, hbar, 0.2)
    state = gaussian_packet(Grid(256), GaussianSpec(math.pi, 3, 0.2))
    amps = forward_transform(state)
    window = amps.k_offset
    for _ in range(5):
        state = kick_step(state, params, enforce_localized=False)
        amps = bessel_propagate(amps, params)
        np.testing.assert_allclose(forward_transform(state, window).amps, amps.amps, atol=1e-10)


def test_bessel_map_without_kick_is_exact():
    params = SimParams.from_map(0.0, 0.5, 1.0, 0.2)
    state = gaussian_packet(Grid(128), GaussianSpec(math.pi, 0, 0.2))
    amps = forward_transform(state)
    out = bessel_propagate(amps, params, band=0)
    np.testing.assert_allclose(out.amps, amps.amps * free_phase(amps.k, params), atol=1e-15)


def test_narrow_band_detected():
    params = SimParams.from_map(20.0, 0.5, 1.0, 0.2)
    amps = forward_transform(gaussian_packet(Grid(256), GaussianSpec(math.pi, 0, 0.2)))
    with pytest.raises(TruncationError):
        bessel_propagate(amps, params, band=3)
    assert default_band(params) == 60
    bessel_propagate(amps, params, band=3, strict=False)


def test_momentum_amplitudes_labels():
    m = MomentumAmplitudes(np.array([3.0, 4.0], complex), -1)
    np.testing.assert_array_equal(m.k, [-1, 0])
    assert m.norm() == pytest.approx(5.0)
