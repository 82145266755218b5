"""Convergence of the discrete chain force to the Bohm quantum force.

For a chain placed at the quantiles of a smooth density, the force derived
from the spacing potential should approach (hbar^2/2m) d/dx[R''/R] with
R = sqrt(density) as the number of particles grows.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import quantum
from .core import UNITS, UnitSystem
from .interaction import ForceField, force
from .scenarios import DensityProfile, quantile_init


@dataclass(frozen=True)
class ForceComparison:
    positions: np.ndarray
    discrete: np.ndarray
    analytic: np.ndarray
    errors: np.ndarray          # (discrete - analytic) / scale on the interior particles
    interior: slice
    scale: float

    @property
    def max_error(self) -> float:
        return float(np.max(np.abs(self.errors)))


@dataclass(frozen=True)
class ConvergenceReport:
    sizes: tuple
    errors: tuple
    order: float
    monotone: bool
    passed: bool
    profile: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _grid_quantum_force(p: DensityProfile, x, mass, units, points=40_001):
    a, b = p.domain
    g = np.linspace(a, b, points)
    rho = p.density(g)
    keep = rho > 1e-300
    f, low = quantum.quantum_force(rho[keep], g[1] - g[0], mass, units)
    return np.interp(x, g[keep][~low], f[~low])


def discrete_vs_quantum_force(p: DensityProfile, n: int, margin: float = 0.2, mass: float = 1.0,
                              units: UnitSystem = UNITS) -> ForceComparison:
    """Compare chain forces with the Bohm force at the particle positions.

    Only the central (1 - 2*margin) fraction of particles is compared. Errors
    are normalised by the largest analytic force there, since the analytic
    force has zeros.
    """
    if not 0 <= margin < 0.5:
        raise ValueError("margin must lie in [0, 0.5)")
    e = quantile_init(p, n, mass)
    x = e.positions
    lo = int(np.floor(margin * n))
    sl = slice(lo, n - lo)
    if np.any(p.density(x[sl]) <= 0):
        raise ValueError("density is not strictly positive on the interior")
    discrete = force(e, ForceField(), units)
    if p.quantum_force is not None:
        analytic = np.asarray(p.quantum_force(x, mass, units), dtype=float)
    else:
        analytic = _grid_quantum_force(p, x, mass, units)
    scale = float(np.max(np.abs(analytic[sl])))
    if scale < 1e-12:
        # analytic force identically zero: fall back to the natural scale hbar^2/(2m w^3)
        w = x[sl][-1] - x[sl][0]
        scale = units.hbar**2 / (2 * mass) * (np.pi / w) ** 3
    return ForceComparison(x, discrete, analytic, (discrete[sl] - analytic[sl]) / scale, sl, scale)


def convergence_study(p: DensityProfile, sizes=(50, 100, 200, 400), margin: float = 0.2,
                      mass: float = 1.0, units: UnitSystem = UNITS) -> ConvergenceReport:
    """Max interior error per chain size and the fitted order of its decay."""
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 3 or min(sizes) < 50:
        raise ValueError("need at least 3 chain sizes, each >= 50")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    errors = tuple(discrete_vs_quantum_force(p, n, margin, mass, units).max_error for n in sizes)
    slope = np.polyfit(np.log(sizes), np.log(errors), 1)[0]
    order = float(-slope)
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    return ConvergenceReport(sizes, errors, order, monotone, bool(monotone and order >= 1.0), p.name)
