"""Velocity-Verlet propagation of the particle chain.

The time step adapts to the closest approach of two neighbours,
``dt = min(dt_max, dt_safety * dx_min^2 / (hbar/m))``, which is the natural
time scale of the 1/dx^2 forces. A step that would reorder the chain or leave
a particle outside the box after reflection is rejected and retried with half
the step, up to ``max_halvings`` times.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit

from .core import UNITS, Ensemble, UnitSystem
from .interaction import ForceField, coupling, force_kernel, min_spacing, potential_kernel

log = logging.getLogger(__name__)

OK, UNRESOLVED_CROSSING, NONFINITE_FORCE = 0, 1, 2
WALL_MODES = ("reflect", "none")


class IntegrationError(RuntimeError):
    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t = {time:.6g} ps)")
        self.time = time


@dataclass(frozen=True)
class IntegratorConfig:
    dt_max: float = 1e-2
    dt_safety: float = 0.01
    energy_drift_tol: float = 1e-6
    wall_mode: str = "none"
    # fixed step in ps; bypasses the adaptive rule (used for reversibility checks)
    fixed_dt: float | None = None
    max_halvings: int = 40

    def __post_init__(self):
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if not 0 < self.dt_safety <= 1:
            raise ValueError("dt_safety must lie in (0, 1]")
        if self.wall_mode not in WALL_MODES:
            raise ValueError(f"wall_mode must be one of {WALL_MODES}")
        if self.fixed_dt is not None and not self.fixed_dt > 0:
            raise ValueError("fixed_dt must be positive")


@dataclass(frozen=True)
class StepDiagnostics:
    accepted_dt: float
    total_energy: float
    rejections: int
    wall_bounces: int


@dataclass
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    energies: np.ndarray
    mass: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def final(self) -> Ensemble:
        return Ensemble(self.positions[-1], self.velocities[-1], self.mass, float(self.times[-1]))

    def __len__(self):
        return self.times.size


@njit(cache=True)
def _advance(x, v, acc, t, t_end, max_steps, c, inv_m, mode, length, reflect,
             dt_max, safety, hbar_over_m, fixed_dt, max_halvings, counters, dtstats, level, work):
    """Advance (x, v, acc) in place until t_end or max_steps accepted steps.

    counters: [steps, rejections, bounces]; dtstats: [min, max] of unclipped
    accepted steps; level: current dyadic step level; work: 5 scratch rows
    of size n+4. Returns (status, t, last accepted dt).
    """
    n = x.size
    xt = work[0, :n]
    vt = work[1, :n]
    at = work[2, :n]
    y = work[3]
    fy = work[4]
    steps = 0
    last_dt = 0.0
    dmin = min_spacing(x, mode, length)
    k = level[0]
    dt_level = dt_max * 2.0 ** (-k)
    while steps < max_steps and t < t_end:
        if fixed_dt > 0.0:
            dt = fixed_dt
        else:
            bound = min(dt_max, safety * dmin * dmin / hbar_over_m)
            # dyadic levels dt_max/2^k; step up only with a 2x margin so the
            # level (and hence the shadow Hamiltonian) changes rarely
            while k > 0 and 2.0 * dt_level <= 0.5 * bound:
                k -= 1
                dt_level *= 2.0
            while dt_level > bound:
                k += 1
                dt_level *= 0.5
            dt = dt_level
        final = False
        if t + dt >= t_end:
            dt = t_end - t
            final = True
        accepted = False
        bounces = 0
        for attempt in range(max_halvings + 1):
            bounces = 0
            ok = True
            d = np.inf
            for i in range(n):
                vt[i] = v[i] + 0.5 * dt * acc[i]
                xt[i] = x[i] + dt * vt[i]
                if reflect:
                    if xt[i] < 0.0:
                        xt[i] = -xt[i]
                        vt[i] = -vt[i]
                        bounces += 1
                    elif xt[i] > length:
                        xt[i] = 2.0 * length - xt[i]
                        vt[i] = -vt[i]
                        bounces += 1
                    if not (0.0 < xt[i] < length):
                        ok = False
                        break
                if i > 0:
                    gap = xt[i] - xt[i - 1]
                    if not (gap > 0.0):
                        ok = False
                        break
                    if gap < d:
                        d = gap
            if ok:
                accepted = True
                break
            counters[1] += 1
            dt *= 0.5
            final = False
        if not accepted:
            level[0] = k
            return UNRESOLVED_CROSSING, t, last_dt
        if mode == 1:
            d = min(d, 2.0 * xt[0], 2.0 * (length - xt[n - 1]))
        force_kernel(xt, c, mode, length, at, y, fy)
        for i in range(n):
            a = at[i] * inv_m
            if not np.isfinite(a):
                level[0] = k
                return NONFINITE_FORCE, t, last_dt
            x[i] = xt[i]
            v[i] = vt[i] + 0.5 * dt * a
            acc[i] = a
        dmin = d
        if final:
            t = t_end
        else:
            t += dt
            dtstats[0] = min(dtstats[0], dt)
            dtstats[1] = max(dtstats[1], dt)
        last_dt = dt
        steps += 1
        counters[0] += 1
        counters[2] += bounces
    level[0] = k
    return OK, t, last_dt


class _State:
    """Mutable working copy used by `step` and `run`."""

    def __init__(self, e: Ensemble, f: ForceField, c: IntegratorConfig, units: UnitSystem):
        if c.wall_mode == "reflect" and f.geometry is None:
            raise ValueError("wall reflection needs a box geometry on the force field")
        self.x = np.array(e.positions, dtype=float)
        self.v = np.array(e.velocities, dtype=float)
        self.t = float(e.time)
        self.mass = e.mass
        self.f, self.c, self.units = f, c, units
        self.coef = coupling(e.mass, units)
        self.length = f.geometry.length if f.geometry is not None else 0.0
        self.work = np.empty((5, self.x.size + 4))
        self.counters = np.zeros(3, dtype=np.int64)
        self.dtstats = np.array([np.inf, 0.0])
        self.level = np.zeros(1, dtype=np.int64)
        self.acc = np.empty_like(self.x)
        force_kernel(self.x, self.coef, f.code, self.length, self.acc, self.work[3], self.work[4])
        if not np.all(np.isfinite(self.acc)):
            raise IntegrationError("non-finite force", self.t)
        self.acc /= self.mass

    def advance(self, t_end: float, max_steps: int) -> float:
        c = self.c
        status, self.t, dt = _advance(
            self.x, self.v, self.acc, self.t, t_end, max_steps, self.coef, 1.0 / self.mass,
            self.f.code, self.length, c.wall_mode == "reflect", c.dt_max, c.dt_safety,
            self.units.hbar / self.mass, c.fixed_dt or 0.0, c.max_halvings, self.counters, self.dtstats, self.level, self.work)
        if status == UNRESOLVED_CROSSING:
            raise IntegrationError(f"crossing unresolvable after {c.max_halvings} halvings", self.t)
        if status == NONFINITE_FORCE:
            raise IntegrationError("non-finite force", self.t)
        return dt

    def energy(self) -> float:
        pot = potential_kernel(self.x, self.coef, self.f.code, self.length, self.work[3])
        return 0.5 * self.mass * float(self.v @ self.v) + pot

    def ensemble(self) -> Ensemble:
        return Ensemble(self.x.copy(), self.v.copy(), self.mass, self.t)


def total_energy(e: Ensemble, f: ForceField, units: UnitSystem = UNITS) -> float:
    x = np.ascontiguousarray(e.positions, dtype=float)
    pot = potential_kernel(x, coupling(e.mass, units), f.code, f.length, np.empty(x.size + 4))
    return 0.5 * e.mass * float(np.dot(e.velocities, e.velocities)) + pot


def step(e: Ensemble, f: ForceField, c: IntegratorConfig,
         units: UnitSystem = UNITS) -> tuple[Ensemble, StepDiagnostics]:
    """One accepted velocity-Verlet step."""
    s = _State(e, f, c, units)
    dt = s.advance(np.inf, 1)
    diag = StepDiagnostics(accepted_dt=dt, total_energy=s.energy(),
                           rejections=int(s.counters[1]), wall_bounces=int(s.counters[2]))
    return s.ensemble(), diag


def run(e: Ensemble, f: ForceField, c: IntegratorConfig, duration: float, sample_every: float,
        units: UnitSystem = UNITS) -> Trajectory:
    """Integrate for `duration` ps, storing a snapshot every `sample_every` ps.

    The step is shortened where needed so that snapshots land exactly on the
    sampling grid. The relative energy drift over all snapshots is recorded in
    ``diagnostics``; ``drift_warning`` is set when it exceeds the configured
    tolerance.
    """
    if not duration > 0 or not sample_every > 0:
        raise ValueError("duration and sample_every must be positive")
    s = _State(e, f, c, units)
    t0 = s.t
    n_samples = int(np.floor(duration / sample_every + 1e-9))
    targets = t0 + sample_every * np.arange(1, n_samples + 1)
    if targets.size == 0 or targets[-1] < t0 + duration - 1e-12:
        targets = np.append(targets, t0 + duration)
    times = [s.t]
    xs, vs, es = [s.x.copy()], [s.v.copy()], [s.energy()]
    for target in targets:
        s.advance(target, 1 << 62)
        times.append(s.t)
        xs.append(s.x.copy())
        vs.append(s.v.copy())
        es.append(s.energy())
    energies = np.array(es)
    e0 = energies[0]
    scale = abs(e0) if e0 != 0 else max(np.abs(energies).max(), 1e-300)
    drift = float(np.max(np.abs(energies - e0)) / scale)
    warn = drift > c.energy_drift_tol
    if warn:
        log.warning("energy drift %.3g exceeds tolerance %.3g", drift, c.energy_drift_tol)
    diagnostics = dict(
        steps=int(s.counters[0]), rejections=int(s.counters[1]), wall_bounces=int(s.counters[2]),
        energy_initial=float(e0), max_energy_drift=drift, drift_warning=bool(warn),
        min_dt=float(s.dtstats[0]) if np.isfinite(s.dtstats[0]) else None,
        max_dt=float(s.dtstats[1]) or None,
        boundary_mode=f.mode, integrator=asdict(c),
    )
    return Trajectory(np.array(times), np.array(xs), np.array(vs), energies, e.mass, diagnostics)
