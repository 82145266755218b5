import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from mqd import quantum
from mqd.core import UNITS, SlitGeometry
from mqd.quantum import (BoxEigenstate, GaussianPacket, GridState, ResolutionError, box_cdf,
                         box_density, box_energy, box_period, gaussian_quantum_force, propagate_grid,
                         quantum_force, two_packet_density)

SLIT = SlitGeometry(50.0, 10.0)


def test_box_density_values():
    assert box_density(BoxEigenstate(1, 100.0), 50.0) == pytest.approx(0.02)
    assert box_density(BoxEigenstate(2, 100.0), 50.0) == pytest.approx(0.0, abs=1e-18)
    with pytest.raises(ValueError):
        box_density(BoxEigenstate(1, 100.0), 101.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_box_cdf_matches_quadrature(n):
    s = BoxEigenstate(n, 100.0)
    for x in (7.0, 33.3, 50.0, 91.0):
        assert box_cdf(s, x) == pytest.approx(quad(lambda y: box_density(s, y), 0, x)[0], abs=1e-12)


def test_box_energy_value():
    e1 = box_energy(1, 100.0, 1.0)
    assert e1 == pytest.approx(np.pi**2 * UNITS.hbar**2 / (2 * 100.0**2), rel=1e-14)
    assert e1 == pytest.approx(6.6141, rel=1e-4)
    assert UNITS.to_ev(e1) == pytest.approx(3.76e-5, rel=2e-3)
    assert box_energy(2, 100.0, 1.0) == pytest.approx(4 * e1, rel=1e-14)


def test_box_period_relation():
    assert box_period(1) == pytest.approx(UNITS.hbar * np.pi / (2 * box_energy(1)), rel=1e-14)
    assert box_period(1) == pytest.approx(27.5, rel=1e-3)


def test_two_packet_density_at_origin_vanishes():
    assert two_packet_density(SLIT, 1.0, 0.0, 0.0) < 1e-6


def test_width_at_20ps():
    w = GaussianPacket(0.0, 10.0).width(20.0)
    assert w == pytest.approx(10 * np.sqrt(1 + (UNITS.hbar_over_m * 20 / 200) ** 2), rel=1e-14)
    assert w == pytest.approx(116.20, abs=0.01)


@given(st.floats(0.0, 40.0))
def test_two_packet_density_normalised_and_even(t):
    x = np.linspace(-3000, 3000, 60001)
    rho = two_packet_density(SLIT, 1.0, t, x)
    assert np.sum(rho) * (x[1] - x[0]) == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(rho, rho[::-1], rtol=1e-10, atol=1e-14)


def test_two_packet_central_maximum_at_t20():
    x = np.linspace(-400, 400, 8001)
    rho = two_packet_density(SLIT, 1.0, 20.0, x)
    assert x[np.argmax(rho)] == 0.0


def test_amplitude_sigma_mode():
    assert quantum.density_sigma(SLIT, "amplitude") == pytest.approx(10 / np.sqrt(2))
    with pytest.raises(ValueError):
        quantum.density_sigma(SLIT, "bogus")


def test_gaussian_grid_propagation_matches_dispersion():
    x = quantum.free_grid(0.0, 2048.0, 1 << 14)
    p = GaussianPacket(0.0, 10.0)
    out = propagate_grid(quantum.gaussian_state(p, x), 20.0, 0.05)
    rho = out.density
    peak = p.density(x, 20.0).max()
    assert np.max(np.abs(rho - p.density(x, 20.0))) < 1e-6 * peak
    std = np.sqrt(np.sum(x**2 * rho) / np.sum(rho))
    assert std == pytest.approx(p.width(20.0), rel=1e-6)


def test_free_norm_conserved_over_many_steps():
    x = quantum.free_grid(0.0, 1024.0, 1 << 12)
    st0 = quantum.gaussian_state(GaussianPacket(0.0, 10.0), x)
    out = propagate_grid(st0, 2.0, 2e-4)   # 10^4 steps
    assert abs(out.norm - st0.norm) < 1e-9


def test_box_norm_conserved_and_eigenstate_stationary():
    s = BoxEigenstate(1, 100.0)
    st0 = quantum.box_state(s, 2001)
    period = 2 * np.pi * UNITS.hbar / box_energy(1)
    out = propagate_grid(st0, period, period / 10_000, "box")
    assert abs(out.norm - st0.norm) < 1e-9
    # discrete eigenvector of the CN Laplacian differs from sin^2 only at O(dx^2)
    assert np.max(np.abs(out.density - st0.density)) < 1e-6 * st0.density.max()


def test_two_packet_grid_agrees_with_closed_form():
    x = quantum.free_grid(0.0, 2048.0, 1 << 14)
    out = propagate_grid(quantum.two_packet_state(SLIT, x), 20.0, 0.05)
    exact = two_packet_density(SLIT, 1.0, 20.0, x)
    assert np.max(np.abs(out.density - exact)) < 1e-4 * exact.max()


def test_resolution_errors():
    x = quantum.free_grid(0.0, 40.0, 256)
    with pytest.raises(ResolutionError):
        propagate_grid(quantum.gaussian_state(GaussianPacket(0.0, 10.0), x), 1.0, 0.1)
    coarse = quantum.free_grid(0.0, 1000.0, 64)
    with pytest.raises(ResolutionError):
        propagate_grid(quantum.gaussian_state(GaussianPacket(0.0, 5.0), coarse), 1.0, 0.1)


def test_grid_state_validation():
    with pytest.raises(ValueError):
        GridState(np.array([0.0, 1, 3, 4, 5]), np.ones(5))


def test_quantum_force_gaussian_matches_closed_form():
    x = np.linspace(-60, 60, 4001)
    rho = GaussianPacket(0.0, 10.0).density(x)
    f, low = quantum_force(rho, x[1] - x[0])
    exact = gaussian_quantum_force(x, 10.0)
    inner = ~low & (np.abs(x) < 40)
    assert np.max(np.abs(f[inner] - exact[inner])) < 1e-6 * np.abs(exact).max()


def test_gaussian_quantum_force_formula():
    assert gaussian_quantum_force(10.0, 10.0) == pytest.approx(UNITS.hbar**2 * 10 / (4 * 1e4))


def test_quantum_force_box_eigenstate_vanishes():
    x = np.linspace(0, 100, 401)[1:-1]
    rho = box_density(BoxEigenstate(1, 100.0), x)
    f, low = quantum_force(rho, x[1] - x[0])
    inner = ~low & (x > 20) & (x < 80)
    # typical interaction force scale at N=400: hbar^2/(2m) (pi/L)^3
    scale = UNITS.hbar**2 / 2 * (np.pi / 100) ** 3
    assert np.max(np.abs(f[inner])) < 1e-3 * scale


@given(st.floats(1e-3, 1e3))
def test_quantum_force_invariant_under_density_scaling(c):
    x = np.linspace(-50, 50, 1001)
    rho = GaussianPacket(0.0, 10.0).density(x)
    f1, _ = quantum_force(rho, x[1] - x[0])
    f2, _ = quantum_force(c * rho, x[1] - x[0])
    np.testing.assert_allclose(f2, f1, rtol=1e-7, atol=1e-9 * np.abs(f1).max())


def test_quantum_force_rejects_nonpositive():
    with pytest.raises(ValueError):
        quantum_force(np.zeros(20), 0.1)
