"""Units, physical constants and the shared state types.

Internal units are nanometres, picoseconds and electron masses. Energies are
therefore measured in m_e * nm^2 / ps^2 (about 9.109e-25 J).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as _c

NM = 1e-9
PS = 1e-12


class OrderingError(ValueError):
    """Particle positions are not strictly increasing."""


@dataclass(frozen=True)
class UnitSystem:
    hbar_over_m: float
    hbar: float
    mass_unit_kg: float = _c.m_e
    length_unit: str = "nm"
    time_unit: str = "ps"
    mass_unit: str = "m_e"

    @property
    def energy_unit_joule(self) -> float:
        return self.mass_unit_kg * NM**2 / PS**2

    def to_joule(self, energy):
        return np.asarray(energy, dtype=float) * self.energy_unit_joule

    def from_joule(self, energy_j):
        return np.asarray(energy_j, dtype=float) / self.energy_unit_joule

    def to_ev(self, energy):
        return self.to_joule(energy) / _c.electron_volt


def make_unit_system() -> UnitSystem:
    """CODATA hbar and electron mass expressed in nm, ps and m_e."""
    hbar_over_m = _c.hbar / _c.m_e / NM**2 * PS
    # mass unit is m_e, so hbar in m_e nm^2/ps has the same numerical value
    return UnitSystem(hbar_over_m=hbar_over_m, hbar=hbar_over_m * 1.0)


UNITS = make_unit_system()


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Ensemble:
    """Ordered chain of particles, positions in nm and velocities in nm/ps."""

    positions: np.ndarray
    velocities: np.ndarray = None
    mass: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        x = _frozen(self.positions)
        v = np.zeros_like(x) if self.velocities is None else _frozen(self.velocities)
        if x.ndim != 1 or v.shape != x.shape:
            raise ValueError("positions and velocities must be 1-D arrays of equal length")
        if x.size < 3:
            raise ValueError(f"an ensemble needs at least 3 particles, got {x.size}")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "velocities", v)

    @property
    def n(self) -> int:
        return self.positions.size

    def replace(self, **kw) -> "Ensemble":
        d = dict(positions=self.positions, velocities=self.velocities, mass=self.mass, time=self.time)
        d.update(kw)
        return Ensemble(**d)


def validate_ensemble(e: Ensemble) -> str | None:
    """Return None if the ordering invariant holds, else a description of the first violation."""
    x = np.asarray(e.positions)
    bad = np.flatnonzero(~(np.diff(x) > 0))
    if bad.size:
        i = int(bad[0]) + 1
        return f"ordering violated at index {i}: x[{i - 1}]={x[i - 1]!r} >= x[{i}]={x[i]!r}"
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(e.velocities)):
        return "non-finite position or velocity"
    return None


def require_ordered(x: np.ndarray) -> None:
    d = np.diff(x)
    if not np.all(d > 0):
        i = int(np.flatnonzero(~(d > 0))[0]) + 1
        raise OrderingError(f"positions not strictly increasing at index {i}")


@dataclass(frozen=True)
class BoxGeometry:
    length: float = 100.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("box length must be positive")

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all((x > 0) & (x < self.length)))


@dataclass(frozen=True)
class SlitGeometry:
    """Two slits at +-half_separation; packet_width is the single-slit width."""

    half_separation: float = 50.0
    packet_width: float = 10.0

    def __post_init__(self):
        if not (self.half_separation > 0 and self.packet_width > 0):
            raise ValueError("slit separation and width must be positive")
        if not self.packet_width < self.half_separation:
            raise ValueError("packet width must be smaller than the half separation")

