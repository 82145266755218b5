"""Periods, energies, distribution distances and fringe positions."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from .core import UNITS, UnitSystem
from .integrator import Trajectory
from .scenarios import DensityProfile


class NoPeriodFound(RuntimeError):
    pass


@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    recurrence_depth: float
    confidence: str = "ok"
    sample_index: int = -1
    velocity_depth: float | None = None

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        if self.recurrence_depth < 0:
            raise ValueError("recurrence depth must be non-negative")


def _reference_scale(x0: np.ndarray) -> float:
    uniform = np.linspace(x0[0], x0[-1], x0.size)
    s = float(np.sqrt(np.mean((x0 - uniform) ** 2)))
    if s > 0:
        return s
    # uniform layouts have no deviation; fall back to the mean spacing
    return float((x0[-1] - x0[0]) / (x0.size - 1))


def recurrence_series(t: Trajectory) -> np.ndarray:
    x = np.asarray(t.positions)
    x0 = x[0]
    return np.sqrt(np.mean((x - x0) ** 2, axis=1)) / _reference_scale(x0)


def recurrence_metric(t: Trajectory, i: int) -> float:
    """RMS displacement of snapshot i from snapshot 0, in units of the RMS
    deviation of snapshot 0 from an evenly spaced chain over the same span."""
    x = np.asarray(t.positions)
    if x.shape[0] < 2:
        raise ValueError("trajectory needs at least 2 snapshots")
    x0, xi = x[0], x[i]
    if xi.shape != x0.shape:
        raise ValueError("snapshot length mismatch")
    return float(np.sqrt(np.mean((xi - x0) ** 2)) / _reference_scale(x0))


def _parabola_vertex(y0, y1, y2):
    den = y0 - 2 * y1 + y2
    if den <= 0:
        return 0.0
    return float(np.clip(0.5 * (y0 - y2) / den, -0.5, 0.5))


def detect_period(t: Trajectory, threshold: float = 0.5, weak_above: float = 0.02,
                  exclusion: float = 0.05) -> PeriodEstimate:
    """First local minimum of the recurrence metric below `threshold`.

    Samples inside the first `exclusion` fraction of the span are skipped so
    that the trivial match at t=0 does not count. The minimum is refined by a
    parabola through the three samples around it.
    """
    times = np.asarray(t.times)
    m = recurrence_series(t)
    if m.size < 3:
        raise ValueError("trajectory needs at least 3 snapshots")
    span = times[-1] - times[0]
    start = max(1, int(np.searchsorted(times, times[0] + exclusion * span)))
    for i in range(start, m.size - 1):
        if m[i] < m[i - 1] and m[i] <= m[i + 1] and m[i] < threshold:
            delta = _parabola_vertex(m[i - 1], m[i], m[i + 1])
            h = times[i + 1] - times[i] if delta > 0 else times[i] - times[i - 1]
            period = float(times[i] + delta * h - times[0])
            weak = m[i] > weak_above or span < 2 * period
            v = np.asarray(t.velocities)
            vscale = np.sqrt(np.mean(v ** 2, axis=1)).max()
            vdepth = float(np.sqrt(np.mean((v[i] - v[0]) ** 2)) / vscale) if vscale > 0 else 0.0
            return PeriodEstimate(period, float(m[i]), "weak" if weak else "ok", i, vdepth)
    raise NoPeriodFound("no qualifying minimum of the recurrence metric")


def energy_from_period(p: PeriodEstimate | float, units: UnitSystem = UNITS) -> float:
    """E = hbar * pi / (2 T)."""
    period = p.period if isinstance(p, PeriodEstimate) else float(p)
    if not period > 0:
        raise ValueError("period must be positive")
    return units.hbar * np.pi / (2.0 * period)


def silverman_bandwidth(x) -> float:
    x = np.asarray(x, dtype=float)
    return 1.06 * float(np.std(x)) * x.size ** (-0.2)


def kde(positions, grid, bandwidth: float | None = None) -> np.ndarray:
    x = np.asarray(positions, dtype=float)
    g = np.asarray(grid, dtype=float)
    bw = bandwidth or silverman_bandwidth(x)
    out = np.zeros_like(g)
    for chunk in np.array_split(np.arange(x.size), max(1, x.size // 256)):
        out += np.exp(-0.5 * ((g[:, None] - x[None, chunk]) / bw) ** 2).sum(axis=1)
    return out / (x.size * bw * np.sqrt(2 * np.pi))


def ks_distance(positions, reference: DensityProfile) -> float:
    x = np.sort(np.asarray(positions, dtype=float))
    n = x.size
    f = reference.cumulative(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def distribution_distance(positions, reference: DensityProfile, grid_points: int = 4001) -> dict:
    """KS distance of the ensemble to `reference`, plus an L1 distance of its
    Silverman KDE to the reference density."""
    x = np.asarray(positions, dtype=float)
    if x.size == 0:
        raise ValueError("empty ensemble")
    if x.size < 10:
        raise ValueError("need at least 10 particles")
    bw = silverman_bandwidth(x)
    a, b = reference.domain
    lo, hi = min(a, x.min() - 5 * bw), max(b, x.max() + 5 * bw)
    g = np.linspace(lo, hi, grid_points)
    l1 = float(trapezoid(np.abs(kde(x, g, bw) - reference.density(g)), g))
    return dict(ks=ks_distance(x, reference), l1=l1, bandwidth=bw)


def _refined_extrema(x, y, idx):
    out = []
    for i in idx:
        if 0 < i < y.size - 1:
            delta = _parabola_vertex(*(y[i - 1: i + 2] * (1 if y[i] <= y[i - 1] else -1)))
            out.append(float(x[i] + delta * (x[1] - x[0])))
        else:
            out.append(float(x[i]))
    return out


def local_minima(x, y, min_prominence: float = 0.01) -> list[float]:
    y = np.asarray(y, dtype=float)
    idx, _ = find_peaks(-y, prominence=min_prominence * y.max())
    return _refined_extrema(np.asarray(x, dtype=float), y, idx)


def find_fringe_extrema(x, density, min_prominence: float = 0.01) -> tuple[list[float], list[float]]:
    """Minima and maxima positions of a sampled density on a uniform grid.

    Extrema whose prominence is below `min_prominence` of the global maximum
    are dropped; survivors are refined by parabolic interpolation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(density, dtype=float)
    prom = min_prominence * y.max()
    imax, _ = find_peaks(y, prominence=prom)
    imin, _ = find_peaks(-y, prominence=prom)
    minima = _refined_extrema(x, y, imin)
    maxima = _refined_extrema(x, y, imax)
    if len(minima) + len(maxima) < 2:
        raise ValueError("fewer than 2 extrema found")
    return minima, maxima


@dataclass
class RunReport:
    config: dict = field(default_factory=dict)
    periods: dict = field(default_factory=dict)
    energies_micro: dict = field(default_factory=dict)
    energies_box: dict = field(default_factory=dict)
    distances: dict = field(default_factory=dict)
    fringe_minima_nm: dict = field(default_factory=dict)
    convergence: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.get("passed", False) for c in self.checks.values())

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False, **kw)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj
