import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mqd import quantum
from mqd.analysis import (NoPeriodFound, PeriodEstimate, RunReport, detect_period, distribution_distance,
                          energy_from_period, find_fringe_extrema, kde, ks_distance, local_minima,
                          recurrence_metric, recurrence_series)
from mqd.core import UNITS
from mqd.integrator import Trajectory
from mqd.scenarios import DensityProfile, quantile_init


def synthetic(x_of_t, times):
    xs = np.array([x_of_t(t) for t in times])
    return Trajectory(times, xs, np.gradient(xs, times, axis=0), np.zeros(times.size), 1.0)


def test_metric_self_distance_is_zero():
    tr = synthetic(lambda t: np.linspace(0, 10, 11) + 0.1 * np.sin(t) * np.arange(11) / 10, np.linspace(0, 5, 51))
    assert recurrence_metric(tr, 0) == 0.0


def test_metric_static_trajectory():
    x0 = np.array([1.0, 2.5, 4.0, 7.0])
    tr = synthetic(lambda t: x0, np.linspace(0, 1, 11))
    assert np.all(recurrence_series(tr) == 0)
    with pytest.raises(NoPeriodFound):
        detect_period(tr)


def test_metric_invariant_under_mirroring():
    times = np.linspace(0, 4, 41)
    c = np.linspace(10, 90, 9)
    tr = synthetic(lambda t: c + 0.5 * np.sin(t + c / 10), times)
    mirrored = Trajectory(times, 100.0 - tr.positions[:, ::-1], -tr.velocities[:, ::-1], tr.energies, 1.0)
    for i in (3, 17, 40):
        assert recurrence_metric(mirrored, i) == pytest.approx(recurrence_metric(tr, i), rel=1e-12)


@pytest.mark.parametrize("dt", [0.01, 0.05, 0.1])
def test_synthetic_period_with_phases(dt):
    T0 = 5.0
    k = np.arange(20)
    c, a, phi = 5.0 * k, 0.3 + 0.01 * k, 0.7 * k
    times = np.arange(0, 12.0 + dt / 2, dt)
    tr = synthetic(lambda t: c + a * np.sin(2 * np.pi * t / T0 + phi), times)
    est = detect_period(tr)
    assert abs(est.period - T0) <= dt
    assert est.confidence == "ok"


def test_pure_sine_recurs_at_half_period():
    # x = c + a sin(2 pi t/T0) passes through x(0) again at T0/2
    T0 = 5.0
    c, a = np.linspace(0, 50, 11), np.linspace(0.1, 0.5, 11)
    times = np.arange(0, 12.0, 0.05)
    est = detect_period(synthetic(lambda t: c + a * np.sin(2 * np.pi * t / T0), times))
    assert est.period == pytest.approx(T0 / 2, abs=0.05)


def test_short_span_gives_weak_confidence():
    k = np.arange(10)
    times = np.linspace(0, 7.0, 141)
    est = detect_period(synthetic(lambda t: 5.0 * k + 0.3 * np.sin(2 * np.pi * t / 5 + k), times))
    assert est.confidence == "weak"


def test_period_estimate_validation():
    with pytest.raises(ValueError):
        PeriodEstimate(-1.0, 0.1)


def test_energy_from_period():
    e = energy_from_period(27.5)
    assert e == pytest.approx(UNITS.hbar * np.pi / 55.0, rel=1e-15)
    assert e == pytest.approx(6.6134, rel=2e-4)
    assert e == pytest.approx(quantum.box_energy(1, 100.0, 1.0), rel=1e-3)
    assert e / energy_from_period(6.88) == pytest.approx(6.88 / 27.5, rel=1e-14)
    assert energy_from_period(6.88) / e == pytest.approx(3.997, abs=1e-3)
    assert energy_from_period(PeriodEstimate(27.5, 0.1)) == e
    with pytest.raises(ValueError):
        energy_from_period(0.0)


@given(st.floats(0.1, 1000.0))
def test_energy_inversely_proportional(t):
    assert energy_from_period(10 * t) == pytest.approx(energy_from_period(t) / 10, rel=1e-12)


@pytest.mark.parametrize("n", [10, 101, 1000])
def test_ks_of_own_quantiles(n):
    p = DensityProfile.gaussian(7.0)
    assert ks_distance(quantile_init(p, n).positions, p) == pytest.approx(1 / (2 * n), abs=1e-9)


def test_ks_uniform_vs_box_ground_state():
    n = 4000
    x = quantile_init(DensityProfile.uniform(0, 100), n).positions
    # oracle: sup |x/L - F_box(x)| = sup |sin(2 pi x/L)| / (2 pi)
    g = np.linspace(0, 100, 200001)
    oracle = np.max(np.abs(g / 100 - quantum.box_cdf(quantum.BoxEigenstate(1, 100.0), g)))
    assert oracle == pytest.approx(1 / (2 * np.pi), rel=1e-8)
    assert ks_distance(x, DensityProfile.box(1, 100.0)) == pytest.approx(oracle, abs=1 / n)


def test_distribution_distance_fields():
    p = DensityProfile.gaussian(5.0)
    d = distribution_distance(quantile_init(p, 500).positions, p)
    assert set(d) == {"ks", "l1", "bandwidth"} and d["l1"] < 0.1
    with pytest.raises(ValueError):
        distribution_distance(np.array([]), p)
    with pytest.raises(ValueError):
        distribution_distance(np.arange(5.0), p)


def test_kde_normalised():
    x = np.random.default_rng(0).normal(size=300)
    g = np.linspace(-8, 8, 4001)
    assert np.sum(kde(x, g)) * (g[1] - g[0]) == pytest.approx(1.0, abs=1e-6)


def test_fringe_minima_cos2():
    x = np.linspace(-200, 200, 40001)
    y = np.cos(np.pi * x / 40) ** 2 * np.exp(-x**2 / 2e4)
    minima, maxima = find_fringe_extrema(x, y)
    np.testing.assert_allclose(np.diff(minima), 40.0, atol=0.1)
    assert 0.0 in [round(m, 6) for m in maxima]


def test_fringe_extrema_needs_structure():
    x = np.linspace(-1, 1, 101)
    with pytest.raises(ValueError):
        find_fringe_extrema(x, np.exp(-x**2))


def test_oracle_minima_agree_between_analytic_and_grid():
    from mqd.core import SlitGeometry
    x = quantum.free_grid(0.0, 2048.0, 1 << 14)
    g = SlitGeometry(50, 10)
    grid = quantum.propagate_grid(quantum.two_packet_state(g, x), 20.0, 0.05).density
    a, _ = find_fringe_extrema(x, quantum.two_packet_density(g, 1.0, 20.0, x))
    b, _ = find_fringe_extrema(x, grid)
    assert len(a) == len(b) and np.max(np.abs(np.array(a) - np.array(b))) < 0.5


def test_local_minima_refined():
    x = np.linspace(0, 10, 101)
    assert local_minima(x, (x - 3.33) ** 2 * (x - 9) ** 2 + 1)[0] == pytest.approx(3.33, abs=0.02)


def test_report_json_round_trip():
    r = RunReport(periods={"n=1": dict(period_ps=np.float64(27.6))}, checks={"a": dict(passed=np.bool_(True))})
    d = json.loads(r.to_json())
    assert d["periods"]["n=1"]["period_ps"] == 27.6 and r.passed
    assert set(d) >= {"config", "periods", "energies_micro", "energies_box", "distances",
                      "fringe_minima_nm", "convergence", "diagnostics"}
