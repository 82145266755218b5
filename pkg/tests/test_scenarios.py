import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from mqd import quantum
from mqd.core import SlitGeometry
from mqd.interaction import INTERIOR, MIRROR
from mqd.scenarios import (BOX, DOUBLE_SLIT, DensityProfile, ScenarioSpec, build_box_scenario,
                           build_double_slit_scenario, build_scenario, lobe_counts, lobe_quantile_init,
                           quantile_init)


def test_uniform_quantiles():
    e = quantile_init(DensityProfile.uniform(0, 100), 4)
    np.testing.assert_allclose(e.positions, [12.5, 37.5, 62.5, 87.5], atol=1e-12)


def test_box_ground_state_middle_particle_centered():
    e = quantile_init(DensityProfile.box(1, 100.0), 101)
    assert e.positions[50] == pytest.approx(50.0, abs=1e-12)


def test_box_ground_state_quantiles_match_quadrature():
    x = quantile_init(DensityProfile.box(1, 100.0), 101).positions
    rho = lambda y: 2 / 100 * np.sin(np.pi * y / 100) ** 2
    for k in range(0, 101, 7):
        assert quad(rho, 0, x[k], epsabs=1e-14)[0] == pytest.approx((k + 0.5) / 101, abs=1e-8)


@pytest.mark.parametrize("seeding", ["quantile", "lobe"])
def test_box_state_layouts(seeding):
    for n in (1, 2, 3):
        e, f, c = build_box_scenario(n, 100.0, 101, seeding=seeding)
        assert np.all((e.positions > 0) & (e.positions < 100))
        assert np.all(e.velocities == 0) and f.mode == MIRROR and c.wall_mode == "reflect"


@pytest.mark.parametrize("seeding", ["quantile", "lobe"])
@pytest.mark.parametrize("n", [2, 3])
def test_nodes_leave_gaps(seeding, n):
    e, _, _ = build_box_scenario(n, 100.0, 101, seeding=seeding)
    x = e.positions
    gaps = np.diff(x)
    med = np.median(gaps)
    for j in range(1, n):
        node = 100.0 * j / n
        i = np.searchsorted(x, node)
        assert gaps[i - 1] > 4 * med


def test_lobe_counts():
    assert lobe_counts(101, 3) == [34, 33, 34]
    assert lobe_counts(100, 3) == [33, 34, 33]
    assert lobe_counts(101, 1) == [101]
    assert sum(lobe_counts(101, 2)) == 101


@given(st.integers(3, 400), st.integers(1, 5))
def test_lobe_counts_sum_and_balance(n, lobes):
    c = lobe_counts(n, lobes)
    assert sum(c) == n and max(c) - min(c) <= 1


def test_lobe_seeding_reduces_to_quantile_for_ground_state():
    a = lobe_quantile_init(1, 100.0, 101).positions
    b = quantile_init(DensityProfile.box(1, 100.0), 101).positions
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_lobe_seeding_mirror_symmetric():
    x = lobe_quantile_init(3, 100.0, 101).positions
    np.testing.assert_allclose(x + x[::-1], 100.0, atol=1e-9)


def test_double_slit_symmetric():
    e, f, c = build_double_slit_scenario(SlitGeometry(50, 10), 1000)
    np.testing.assert_allclose(e.positions, -e.positions[::-1], atol=1e-9)
    assert f.mode == INTERIOR and c.wall_mode == "none"


def test_double_slit_packet_counts():
    x = build_double_slit_scenario(SlitGeometry(50, 10), 1000)[0].positions
    for c in (-50, 50):
        assert abs(np.sum(np.abs(x - c) <= 30) - 500) <= 30


def test_two_packet_cdf_consistent_with_pdf():
    p = DensityProfile.two_packet(SlitGeometry(50, 10))
    for x in (-70.0, -50.0, 0.0, 33.0):
        assert p.cumulative(x) == pytest.approx(quad(p.pdf, p.domain[0], x, points=[-50, 50])[0], abs=1e-9)


def test_numeric_cdf_fallback():
    p = DensityProfile((0.0, 1.0), lambda x: 2 * np.asarray(x))
    assert p.cumulative(0.5) == pytest.approx(0.25, abs=1e-8)
    np.testing.assert_allclose(p.quantile(np.array([0.25, 0.64])), [0.5, 0.8], atol=1e-6)


@given(st.floats(0.2, 5.0), st.floats(-20, 20))
def test_scaled_and_shifted_profiles(factor, delta):
    p = DensityProfile.gaussian(10.0)
    q = p.scaled(factor).shifted(delta)
    assert q.cumulative(delta + factor * 7.0) == pytest.approx(p.cumulative(7.0), abs=1e-12)
    assert q.quantum_force(delta + factor * 5.0) == pytest.approx(p.quantum_force(5.0) / factor**3, rel=1e-9)


def test_spec_resolution_defaults():
    b = ScenarioSpec(BOX, n=2).resolved()
    assert b.particles == 101 and b.boundary == MIRROR and b.duration == pytest.approx(2.2 * quantum.box_period(2), abs=0.01)
    d = ScenarioSpec(DOUBLE_SLIT).resolved()
    assert d.particles == 1000 and d.duration == 20.0 and d.boundary == INTERIOR
    assert b.resolved() == b


@pytest.mark.parametrize("kw", [dict(n=0), dict(n=1.5), dict(particles=2), dict(boundary="x"), dict(sigma_mode="x"),
                                dict(duration=-1.0), dict(kind="tunnel"), dict(kind=DOUBLE_SLIT, width=60.0)])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        ScenarioSpec(**kw)


def test_double_slit_rejects_mirror_and_small_n():
    with pytest.raises(ValueError):
        build_scenario(ScenarioSpec(DOUBLE_SLIT, boundary=MIRROR))
    with pytest.raises(ValueError):
        build_double_slit_scenario(SlitGeometry(), 50)
