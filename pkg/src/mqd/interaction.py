"""Spacing-dependent interaction potential and its exact gradient.

    V = hbar^2/(8 m) * sum_k (1/(x_{k+1}-x_k) - 1/(x_k-x_{k-1}))^2

Two ways of closing the sum at the chain ends are supported:

``interior``
    only summands whose three particles all exist (k = 2..N-1, 1-based).
``mirror``
    the chain is continued by its reflections across the walls of a box at
    0 and L, which makes the configuration 2L-periodic. The potential is half
    the energy of one period, i.e. the summands centred on the real particles
    with ghosts ``x_0 = -x_1`` and ``x_{N+1} = 2L - x_N``. Its exact gradient
    equals the force the periodic chain exerts on each real particle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import UNITS, BoxGeometry, Ensemble, OrderingError, UnitSystem

INTERIOR = "interior"
MIRROR = "mirror"
MODES = (INTERIOR, MIRROR)
MODE_CODE = {INTERIOR: 0, MIRROR: 1}


@dataclass(frozen=True)
class ForceField:
    mode: str = INTERIOR
    geometry: BoxGeometry | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown boundary mode {self.mode!r}; expected one of {MODES}")
        if self.mode == MIRROR and self.geometry is None:
            raise ValueError("mirror-image mode needs a box geometry")

    @property
    def code(self) -> int:
        return MODE_CODE[self.mode]

    @property
    def length(self) -> float:
        return self.geometry.length if self.geometry is not None else 0.0


def coupling(mass: float, units: UnitSystem = UNITS) -> float:
    """Prefactor hbar^2/(8 m) in m_e nm^4/ps^2."""
    return units.hbar**2 / (8.0 * mass)


# -- kernels ---------------------------------------------------------------


@njit(cache=True)
def _chain_force(y, c, f):
    # f_j = G_{j-1} - G_j with G_i = 2c (du_{i-1} - du_i) u_i^2, u_i = 1/(y_{i+1}-y_i)
    # (the closed five-point stencil over y_{j-2}..y_{j+2}); missing du terms are 0
    m = y.size
    for j in range(m):
        f[j] = 0.0
    u_prev = 0.0
    u = 1.0 / (y[1] - y[0])
    for i in range(m - 1):
        u_next = 1.0 / (y[i + 2] - y[i + 1]) if i + 2 < m else 0.0
        g = 0.0
        if i >= 1:
            g += u - u_prev
        if i + 2 < m:
            g -= u_next - u
        big_g = 2.0 * c * g * u * u
        f[i + 1] += big_g
        f[i] -= big_g
        u_prev = u
        u = u_next


@njit(cache=True)
def _chain_potential(y, c):
    s = 0.0
    u = 1.0 / (y[1] - y[0])
    for i in range(1, y.size - 1):
        u_next = 1.0 / (y[i + 1] - y[i])
        d = u_next - u
        s += d * d
        u = u_next
    return c * s


@njit(cache=True)
def _fill_mirror(x, length, y, ghosts):
    n = x.size
    for g in range(ghosts):
        y[ghosts - 1 - g] = -x[g]
        y[ghosts + n + g] = 2.0 * length - x[n - 1 - g]
    for i in range(n):
        y[ghosts + i] = x[i]


@njit(cache=True)
def force_kernel(x, c, mode, length, out, y, fy):
    """Forces on the real particles; ``y``/``fy`` are scratch of size n+4."""
    n = x.size
    if mode == 0:
        _chain_force(x, c, out)
        return
    _fill_mirror(x, length, y, 2)
    _chain_force(y, c, fy)
    for i in range(n):
        out[i] = fy[i + 2]


@njit(cache=True)
def potential_kernel(x, c, mode, length, y):
    if mode == 0:
        return _chain_potential(x, c)
    n = x.size
    _fill_mirror(x, length, y, 1)
    return _chain_potential(y[: n + 2], c)


@njit(cache=True)
def min_spacing(x, mode, length):
    """Smallest gap between neighbours, including real-ghost gaps in mirror mode."""
    d = x[1] - x[0]
    for i in range(1, x.size - 1):
        s = x[i + 1] - x[i]
        if s < d:
            d = s
    if mode == 1:
        d = min(d, 2.0 * x[0], 2.0 * (length - x[x.size - 1]))
    return d


# -- public API -----------------------------------------------------------


def _checked_positions(e: Ensemble | np.ndarray, field: ForceField) -> np.ndarray:
    x = np.ascontiguousarray(e.positions if isinstance(e, Ensemble) else e, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValueError("need a 1-D chain of at least 3 particles")
    if not np.all(np.diff(x) > 0):
        i = int(np.flatnonzero(~(np.diff(x) > 0))[0]) + 1
        raise OrderingError(f"positions not strictly increasing at index {i}")
    if field.mode == MIRROR and not field.geometry.contains(x):
        raise OrderingError("mirror-image mode needs every particle strictly inside the box")
    return x


def _mass(e, mass):
    if mass is not None:
        return mass
    return e.mass if isinstance(e, Ensemble) else 1.0


def potential(e: Ensemble | np.ndarray, field: ForceField = ForceField(),
              units: UnitSystem = UNITS, mass: float | None = None) -> float:
    """Interaction energy of the chain in m_e nm^2/ps^2."""
    x = _checked_positions(e, field)
    c = coupling(_mass(e, mass), units)
    return float(potential_kernel(x, c, field.code, field.length, np.empty(x.size + 4)))


def force(e: Ensemble | np.ndarray, field: ForceField = ForceField(),
          units: UnitSystem = UNITS, mass: float | None = None) -> np.ndarray:
    """Exact -dV/dx_j for every particle, in m_e nm/ps^2."""
    x = _checked_positions(e, field)
    c = coupling(_mass(e, mass), units)
    out = np.empty_like(x)
    force_kernel(x, c, field.code, field.length, out, np.empty(x.size + 4), np.empty(x.size + 4))
    return out


def force_fd_oracle(e: Ensemble | np.ndarray, field: ForceField = ForceField(), h: float = 1e-6,
                    units: UnitSystem = UNITS, mass: float | None = None) -> np.ndarray:
    """Central finite difference -[V(x_j+h) - V(x_j-h)]/(2h), one particle at a time.

    O(N^2); meant for testing the analytic stencil only.
    """
    x = _checked_positions(e, field)
    if not h > 0:
        raise ValueError("step must be positive")
    gaps = np.diff(x)
    if h >= gaps.min():
        raise ValueError(f"step h={h} would move a particle past its neighbour")
    if field.mode == MIRROR and h >= min(x[0], field.length - x[-1]):
        raise ValueError(f"step h={h} would push a particle through a wall")
    c = coupling(_mass(e, mass), units)
    y = np.empty(x.size + 4)
    out = np.empty_like(x)
    xp = x.copy()
    for j in range(x.size):
        xp[j] = x[j] + h
        vp = potential_kernel(xp, c, field.code, field.length, y)
        xp[j] = x[j] - h
        vm = potential_kernel(xp, c, field.code, field.length, y)
        xp[j] = x[j]
        out[j] = -(vp - vm) / (2.0 * h)
    return out
