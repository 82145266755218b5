"""Quantum-mechanical reference solutions.

Closed forms for the box eigenstates and freely spreading Gaussian packets,
plus a grid propagator (spectral split-step in free space, Crank-Nicolson
between hard walls) used to cross-check them.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from .core import UNITS, SlitGeometry, UnitSystem

SIGMA_MODES = ("density", "amplitude")


class ResolutionError(ValueError):
    """Grid too coarse or too small for the requested propagation."""


class NormDriftError(RuntimeError):
    pass


# -- box ----------------------------------------------------------------------


@dataclass(frozen=True)
class BoxEigenstate:
    n: int = 1
    length: float = 100.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("quantum number must be a positive integer")
        if not self.length > 0:
            raise ValueError("box length must be positive")

    def amplitude(self, x):
        return np.sqrt(2.0 / self.length) * np.sin(self.n * np.pi * np.asarray(x, dtype=float) / self.length)


def box_density(s: BoxEigenstate, x):
    """(2/L) sin^2(n pi x / L); x must lie in [0, L]."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > s.length)):
        raise ValueError("x outside the box")
    return 2.0 / s.length * np.sin(s.n * np.pi * x / s.length) ** 2


def box_cdf(s: BoxEigenstate, x):
    x = np.asarray(x, dtype=float)
    k = 2.0 * s.n * np.pi / s.length
    return x / s.length - np.sin(k * x) / (k * s.length)


def box_energy(n: int, length: float = 100.0, mass: float = 1.0, units: UnitSystem = UNITS) -> float:
    if n < 1:
        raise ValueError("quantum number must be >= 1")
    return n**2 * np.pi**2 * units.hbar**2 / (2.0 * mass * length**2)


def box_period(n: int, length: float = 100.0, mass: float = 1.0, units: UnitSystem = UNITS) -> float:
    """Period T_n with hbar*pi/(2 T_n) = E_n, i.e. m L^2 / (n^2 pi hbar)."""
    return units.hbar * np.pi / (2.0 * box_energy(n, length, mass, units))


# -- free Gaussian packets ----------------------------------------------------


@dataclass(frozen=True)
class GaussianPacket:
    """Free packet at rest; ``sigma`` is the standard deviation of |psi|^2 at t=0."""

    center: float = 0.0
    sigma: float = 10.0
    mass: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def spreading_time(self, units: UnitSystem = UNITS) -> float:
        return 2.0 * self.mass * self.sigma**2 / units.hbar

    def width(self, t, units: UnitSystem = UNITS):
        """sigma_t = sigma sqrt(1 + (hbar t / (2 m sigma^2))^2)."""
        return self.sigma * np.sqrt(1.0 + (np.asarray(t, dtype=float) / self.spreading_time(units)) ** 2)

    def psi(self, x, t=0.0, units: UnitSystem = UNITS):
        a = 1.0 + 1j * t / self.spreading_time(units)
        dx = np.asarray(x, dtype=float) - self.center
        return (2 * np.pi * self.sigma**2) ** -0.25 / np.sqrt(a) * np.exp(-dx**2 / (4 * self.sigma**2 * a))

    def density(self, x, t=0.0, units: UnitSystem = UNITS):
        s = self.width(t, units)
        dx = np.asarray(x, dtype=float) - self.center
        return np.exp(-dx**2 / (2 * s**2)) / (s * np.sqrt(2 * np.pi))


def density_sigma(g: SlitGeometry, sigma_mode: str = "density") -> float:
    """Standard deviation of one slit's |psi|^2 under the chosen reading of the slit width."""
    if sigma_mode == "density":
        return g.packet_width
    if sigma_mode == "amplitude":
        # psi ~ exp(-x^2/(2 w^2)) gives |psi|^2 with std w/sqrt(2)
        return g.packet_width / np.sqrt(2.0)
    raise ValueError(f"sigma_mode must be one of {SIGMA_MODES}")


def slit_packets(g: SlitGeometry, mass: float = 1.0, sigma_mode: str = "density"):
    s = density_sigma(g, sigma_mode)
    return (GaussianPacket(g.half_separation, s, mass), GaussianPacket(-g.half_separation, s, mass))


def two_packet_overlap(g: SlitGeometry, sigma_mode: str = "density") -> float:
    """<psi_+|psi_-> for two real packets; conserved by free evolution."""
    s = density_sigma(g, sigma_mode)
    return float(np.exp(-g.half_separation**2 / (2 * s**2)))


def two_packet_density(g: SlitGeometry, mass: float = 1.0, t: float = 0.0, x=0.0,
                       sigma_mode: str = "density", sign: int = 1, units: UnitSystem = UNITS):
    """|psi_+ + sign psi_-|^2, normalised, for packets released at rest from +-X."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    p, m = slit_packets(g, mass, sigma_mode)
    norm = 2.0 + 2.0 * sign * two_packet_overlap(g, sigma_mode)
    return np.abs(p.psi(x, t, units) + sign * m.psi(x, t, units)) ** 2 / norm


# -- grid propagation ---------------------------------------------------------


@dataclass(frozen=True)
class GridState:
    x: np.ndarray
    psi: np.ndarray
    time: float = 0.0
    mass: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 4:
            raise ValueError("grid must be 1-D with at least 4 points")
        steps = np.diff(x)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("grid must be uniform")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "psi", np.asarray(self.psi, dtype=complex))

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.density) * self.dx)

    def normalized(self) -> "GridState":
        return replace(self, psi=self.psi / np.sqrt(self.norm))


def free_grid(center: float, half_width: float, points: int) -> np.ndarray:
    """Periodic grid for the spectral propagator (right end point excluded)."""
    return center - half_width + 2.0 * half_width * np.arange(points) / points


def box_grid(length: float, points: int) -> np.ndarray:
    """Grid including both walls."""
    return np.linspace(0.0, length, points)


def gaussian_state(p: GaussianPacket, x) -> GridState:
    return GridState(x, p.psi(x), 0.0, p.mass).normalized()


def two_packet_state(g: SlitGeometry, x, mass: float = 1.0, sigma_mode: str = "density",
                     sign: int = 1) -> GridState:
    p, m = slit_packets(g, mass, sigma_mode)
    return GridState(x, p.psi(x) + sign * m.psi(x), 0.0, mass).normalized()


def box_state(s: BoxEigenstate, points: int, mass: float = 1.0) -> GridState:
    x = box_grid(s.length, points)
    psi = s.amplitude(x)
    psi[0] = psi[-1] = 0.0
    return GridState(x, psi, 0.0, mass).normalized()


def _check_spectral_resolution(state: GridState, tol: float = 1e-10):
    rho = state.density
    edge = max(rho[:8].max(), rho[-8:].max())
    if edge > tol * rho.max():
        raise ResolutionError("wave function reaches the edge of the periodic grid; enlarge the domain")
    spec = np.abs(np.fft.fft(state.psi)) ** 2
    n = spec.size
    band = spec[n // 2 - n // 16: n // 2 + n // 16]
    if band.max() > tol * spec.max():
        raise ResolutionError("grid too coarse: spectrum not resolved below the Nyquist band")


def propagate_grid(initial: GridState, duration: float, dt: float, potential: str = "none",
                   units: UnitSystem = UNITS, check: bool = True) -> GridState:
    """Evolve ``initial`` under the free Schrodinger equation for ``duration`` ps.

    potential="none": spectral split-step on a periodic grid (exact kinetic
    propagator per step). potential="box": Crank-Nicolson with the amplitudes
    at both end points held at zero.
    """
    if duration < 0 or not dt > 0:
        raise ValueError("need duration >= 0 and dt > 0")
    nsteps = int(np.ceil(duration / dt - 1e-9))
    if nsteps == 0:
        return initial
    h = duration / nsteps
    hm = units.hbar / initial.mass
    n0 = initial.norm
    psi = initial.psi.copy()
    if potential == "none":
        if check:
            _check_spectral_resolution(initial)
        k = 2 * np.pi * np.fft.fftfreq(psi.size, d=initial.dx)
        phase = np.exp(-0.5j * hm * k**2 * h)
        for _ in range(nsteps):
            psi = np.fft.ifft(phase * np.fft.fft(psi))
    elif potential == "box":
        psi = _crank_nicolson(psi, initial.dx, hm, h, nsteps)
    else:
        raise ValueError("potential must be 'none' or 'box'")
    out = replace(initial, psi=psi, time=initial.time + duration)
    if check and potential == "none":
        rho = out.density
        if max(rho[:8].max(), rho[-8:].max()) > 1e-8 * rho.max():
            raise ResolutionError("wave function wrapped around the periodic grid; enlarge the domain")
    drift = abs(out.norm - n0) / n0
    if check and drift > 1e-6:
        raise NormDriftError(f"norm drifted by {drift:.3g}")
    return out


def _crank_nicolson(psi, dx, hbar_over_m, h, nsteps):
    # H = -(hbar^2/2m) D2 on interior points, Dirichlet walls
    inner = psi[1:-1].copy()
    r = 1j * hbar_over_m * h / (4 * dx * dx)   # (i h / 2 hbar) * (hbar^2 / 2m dx^2)
    m = inner.size
    ab = np.empty((3, m), dtype=complex)
    ab[0, :] = -r
    ab[1, :] = 1 + 2 * r
    ab[2, :] = -r
    rhs = np.empty_like(inner)
    for _ in range(nsteps):
        rhs[:] = (1 - 2 * r) * inner
        rhs[1:] += r * inner[:-1]
        rhs[:-1] += r * inner[1:]
        inner = solve_banded((1, 1), ab, rhs, check_finite=False)
    out = np.zeros_like(psi)
    out[1:-1] = inner
    return out


# -- Bohm quantum force --------------------------------------------------------


def quantum_force(density, dx: float, mass: float = 1.0, units: UnitSystem = UNITS):
    """(hbar^2/2m) d/dx[R''/R] with R = sqrt(density) on a uniform grid.

    Fourth-order central differences in the interior. The first and last four
    samples fall back to lower-order one-sided differences and are flagged in
    the returned mask (True = low accuracy).
    """
    rho = np.asarray(density, dtype=float)
    if rho.ndim != 1 or rho.size < 9:
        raise ValueError("need at least 9 uniformly spaced density samples")
    if np.any(rho <= 0) or not np.all(np.isfinite(rho)):
        raise ValueError("density must be strictly positive")
    r = np.sqrt(rho)
    d2 = np.gradient(np.gradient(r, dx, edge_order=2), dx, edge_order=2)
    d2[2:-2] = (-r[:-4] + 16 * r[1:-3] - 30 * r[2:-2] + 16 * r[3:-1] - r[4:]) / (12 * dx * dx)
    q = d2 / r
    dq = np.gradient(q, dx, edge_order=2)
    dq[2:-2] = (q[:-4] - 8 * q[1:-3] + 8 * q[3:-1] - q[4:]) / (12 * dx)
    low = np.zeros(rho.size, dtype=bool)
    low[:4] = low[-4:] = True
    return units.hbar**2 / (2 * mass) * dq, low


def gaussian_quantum_force(x, sigma: float, center: float = 0.0, mass: float = 1.0,
                           units: UnitSystem = UNITS):
    """Closed form for a Gaussian density of std sigma: hbar^2 (x-c) / (4 m sigma^4)."""
    return units.hbar**2 * (np.asarray(x, dtype=float) - center) / (4 * mass * sigma**4)
