"""Initial conditions for the box and double-slit experiments.

Particles are placed deterministically at the quantiles of a target density,
x_k = F^{-1}((k - 1/2)/N), so the local spacing carries the density.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import ndtr

from . import quantum
from .core import UNITS, BoxGeometry, Ensemble, SlitGeometry, UnitSystem
from .integrator import IntegratorConfig
from .interaction import INTERIOR, MIRROR, MODES, ForceField

BOX, DOUBLE_SLIT = "box", "double-slit"
SEEDINGS = ("quantile", "lobe")


@dataclass(frozen=True)
class DensityProfile:
    """Normalised 1-D density on [a, b] with CDF access.

    ``quantum_force(x, mass, units)`` may supply the closed-form Bohm force;
    otherwise it is computed on a fine grid when needed.
    """

    domain: tuple[float, float]
    pdf: Callable
    cdf: Callable | None = None
    name: str = "custom"
    quantum_force: Callable | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        a, b = self.domain
        if not b > a:
            raise ValueError("empty domain")
        if self.cdf is None:
            xs = np.linspace(a, b, 200_001)
            rho = np.clip(np.asarray(self.pdf(xs), dtype=float), 0, None)
            c = cumulative_trapezoid(rho, xs, initial=0.0)
            if not c[-1] > 0:
                raise ValueError("density has no mass on its domain")
            c /= c[-1]
            object.__setattr__(self, "cdf", lambda x, xs=xs, c=c: np.interp(x, xs, c))

    def density(self, x):
        """pdf with zero outside the domain."""
        x = np.asarray(x, dtype=float)
        a, b = self.domain
        inside = (x >= a) & (x <= b)
        out = np.zeros_like(x)
        out[inside] = self.pdf(x[inside])
        return out

    def cumulative(self, x):
        a, b = self.domain
        return np.clip(self.cdf(np.clip(np.asarray(x, dtype=float), a, b)), 0.0, 1.0)

    def quantile(self, q, tol: float = 1e-13, max_iter: int = 200, newton: int = 2) -> np.ndarray:
        """F^{-1}(q) by vectorised bisection, polished with Newton steps.

        Chain forces take third differences of inverse spacings, so layout
        errors are amplified by ~spacing^-5; hence the tight tolerance.
        """
        q = np.asarray(q, dtype=float)
        lo = np.full(q.shape, float(self.domain[0]))
        hi = np.full(q.shape, float(self.domain[1]))
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            below = self.cumulative(mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.max(hi - lo) <= tol:
                break
        x = 0.5 * (lo + hi)
        for _ in range(newton):
            rho = self.density(x)
            ok = rho > 0
            step = np.zeros_like(x)
            step[ok] = (self.cumulative(x[ok]) - q[ok]) / rho[ok]
            # keep the polish inside the bracket
            x = np.where(np.abs(step) <= hi - lo, x - step, x)
        return x

    def scaled(self, factor: float) -> "DensityProfile":
        """The same shape stretched by ``factor`` about the origin."""
        a, b = self.domain
        qf = None
        if self.quantum_force is not None:
            # F scales as length^-3
            qf = lambda x, mass=1.0, units=UNITS, f=self.quantum_force: f(x / factor, mass, units) / factor**3
        return DensityProfile((a * factor, b * factor), lambda x: self.pdf(x / factor) / factor,
                              lambda x: self.cdf(x / factor), f"{self.name} x{factor:g}", qf,
                              dict(self.params, scale=factor))

    def shifted(self, delta: float) -> "DensityProfile":
        a, b = self.domain
        qf = None
        if self.quantum_force is not None:
            qf = lambda x, mass=1.0, units=UNITS, f=self.quantum_force: f(x - delta, mass, units)
        return DensityProfile((a + delta, b + delta), lambda x: self.pdf(x - delta),
                              lambda x: self.cdf(x - delta), f"{self.name} +{delta:g}", qf,
                              dict(self.params, shift=delta))

    # -- constructors --

    @classmethod
    def uniform(cls, a: float, b: float) -> "DensityProfile":
        w = b - a
        return cls((a, b), lambda x: np.full(np.shape(x), 1.0 / w), lambda x: (np.asarray(x) - a) / w,
                   "uniform", lambda x, mass=1.0, units=UNITS: np.zeros(np.shape(x)), dict(a=a, b=b))

    @classmethod
    def box(cls, n: int, length: float = 100.0) -> "DensityProfile":
        s = quantum.BoxEigenstate(n, length)
        # interior quantum potential is the constant E_n, so its gradient vanishes
        return cls((0.0, length), lambda x: quantum.box_density(s, x), lambda x: quantum.box_cdf(s, x),
                   f"box n={n}", lambda x, mass=1.0, units=UNITS: np.zeros(np.shape(x)),
                   dict(n=n, length=length))

    @classmethod
    def gaussian(cls, sigma: float, center: float = 0.0, span: float = 12.0) -> "DensityProfile":
        p = quantum.GaussianPacket(center, sigma)
        return cls((center - span * sigma, center + span * sigma), p.density,
                   lambda x: ndtr((np.asarray(x) - center) / sigma), f"gaussian sigma={sigma:g}",
                   lambda x, mass=1.0, units=UNITS: quantum.gaussian_quantum_force(x, sigma, center, mass, units),
                   dict(sigma=sigma, center=center))

    @classmethod
    def two_packet(cls, g: SlitGeometry, sigma_mode: str = "density", mass: float = 1.0,
                   span: float = 12.0) -> "DensityProfile":
        """|psi_+ + psi_-|^2 at release, including the (tiny) cross term."""
        s = quantum.density_sigma(g, sigma_mode)
        X = g.half_separation
        eps = quantum.two_packet_overlap(g, sigma_mode)

        def cdf(x):
            x = np.asarray(x, dtype=float)
            return (ndtr((x - X) / s) + ndtr((x + X) / s) + 2 * eps * ndtr(x / s)) / (2 + 2 * eps)

        def pdf(x):
            return quantum.two_packet_density(g, mass, 0.0, x, sigma_mode)

        return cls((-X - span * s, X + span * s), pdf, cdf, "two-packet",
                   params=dict(half_separation=X, width=g.packet_width, sigma_mode=sigma_mode))


def quantile_init(p: DensityProfile, n: int, mass: float = 1.0) -> Ensemble:
    """Ensemble at rest with x_k = F^{-1}((k - 1/2)/n)."""
    if n < 3:
        raise ValueError("need at least 3 particles")
    x = p.quantile((np.arange(1, n + 1) - 0.5) / n)
    if not np.all(np.diff(x) > 0):
        raise ValueError(f"CDF of {p.name!r} cannot be inverted at this resolution (support gap?)")
    return Ensemble(x, np.zeros(n), mass)


def lobe_counts(n_particles: int, lobes: int) -> list[int]:
    """Split particles over lobes as evenly as possible, extras placed symmetrically."""
    base, extra = divmod(n_particles, lobes)
    counts = [base] * lobes
    if extra:
        for i in np.round((np.arange(extra) + 0.5) * lobes / extra - 0.5).astype(int):
            counts[int(i)] += 1
    return counts


def lobe_quantile_init(n: int, length: float, n_particles: int, mass: float = 1.0) -> Ensemble:
    """Quantile placement done separately inside each lobe of the n-th box state.

    Every node then sits in the middle of a gap (in CDF terms), exactly like
    the wall nodes in mirror mode. Identical to `quantile_init` for n = 1.
    """
    counts = lobe_counts(n_particles, n)
    if min(counts) < 1:
        raise ValueError("fewer particles than lobes")
    prof = DensityProfile.box(n, length)
    q = np.concatenate([i / n + (np.arange(1, c + 1) - 0.5) / (c * n) for i, c in enumerate(counts)])
    x = prof.quantile(q)
    if not np.all(np.diff(x) > 0):
        raise ValueError("lobe placement produced coincident particles")
    return Ensemble(x, np.zeros(n_particles), mass)


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to reproduce one run; `resolved()` fills kind-specific defaults."""

    kind: str = BOX
    n: int = 1
    length: float = 100.0
    half_separation: float = 50.0
    width: float = 10.0
    particles: int | None = None
    duration: float | None = None
    sample_every: float | None = None
    boundary: str | None = None
    sigma_mode: str = "density"
    seeding: str = "lobe"
    mass: float = 1.0
    dt_max: float | None = None
    dt_safety: float | None = None
    energy_drift_tol: float = 1e-6

    def __post_init__(self):
        if self.kind not in (BOX, DOUBLE_SLIT):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.kind == BOX and (int(self.n) != self.n or self.n < 1):
            raise ValueError("box state n must be an integer >= 1")
        if self.particles is not None and self.particles < 3:
            raise ValueError("need at least 3 particles")
        if self.boundary is not None and self.boundary not in MODES:
            raise ValueError(f"boundary must be one of {MODES}")
        if self.sigma_mode not in quantum.SIGMA_MODES:
            raise ValueError(f"sigma_mode must be one of {quantum.SIGMA_MODES}")
        if self.seeding not in SEEDINGS:
            raise ValueError(f"seeding must be one of {SEEDINGS}")
        for name in ("duration", "sample_every", "dt_max", "dt_safety"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not (self.length > 0 and self.mass > 0):
            raise ValueError("length and mass must be positive")
        if self.kind == DOUBLE_SLIT:
            SlitGeometry(self.half_separation, self.width)

    def resolved(self, units: UnitSystem = UNITS) -> "ScenarioSpec":
        if self.kind == BOX:
            period = quantum.box_period(self.n, self.length, self.mass, units)
            duration = self.duration or float(np.round(2.2 * period, 2))
            d = dict(particles=self.particles or 101, duration=duration,
                     sample_every=self.sample_every or duration / 600,
                     boundary=self.boundary or MIRROR, dt_max=self.dt_max or 1e-2,
                     dt_safety=self.dt_safety or 0.0025)
        else:
            duration = self.duration or 20.0
            d = dict(particles=self.particles or 1000, duration=duration,
                     sample_every=self.sample_every or duration / 100,
                     boundary=self.boundary or INTERIOR, dt_max=self.dt_max or 1e-2,
                     dt_safety=self.dt_safety or 0.01)
        return replace(self, **d)

    def to_dict(self) -> dict:
        return asdict(self)


def build_box_scenario(n: int = 1, length: float = 100.0, n_particles: int = 101,
                       boundary: str = MIRROR, seeding: str = "lobe", mass: float = 1.0,
                       config: IntegratorConfig | None = None):
    """Chain seeded from the n-th box eigenstate, walls reflecting."""
    if n < 1:
        raise ValueError("box state n must be >= 1")
    if n_particles < 3:
        raise ValueError("need at least 3 particles")
    if seeding == "lobe":
        e = lobe_quantile_init(n, length, n_particles, mass)
    elif seeding == "quantile":
        e = quantile_init(DensityProfile.box(n, length), n_particles, mass)
    else:
        raise ValueError(f"seeding must be one of {SEEDINGS}")
    f = ForceField(boundary, BoxGeometry(length))
    c = config or IntegratorConfig(wall_mode="reflect")
    if c.wall_mode != "reflect":
        c = replace(c, wall_mode="reflect")
    return e, f, c


def build_double_slit_scenario(g: SlitGeometry = SlitGeometry(), n_particles: int = 1000,
                               duration: float = 20.0, sigma_mode: str = "density", mass: float = 1.0,
                               config: IntegratorConfig | None = None):
    """Chain seeded from the two-packet density at release; free space, no walls."""
    if n_particles < 100:
        raise ValueError("double slit needs at least 100 particles")
    if not duration > 0:
        raise ValueError("duration must be positive")
    e = quantile_init(DensityProfile.two_packet(g, sigma_mode, mass), n_particles, mass)
    c = config or IntegratorConfig(dt_safety=0.01, wall_mode="none")
    return e, ForceField(INTERIOR), replace(c, wall_mode="none")


def build_scenario(spec: ScenarioSpec, units: UnitSystem = UNITS):
    s = spec.resolved(units)
    cfg = IntegratorConfig(dt_max=s.dt_max, dt_safety=s.dt_safety, energy_drift_tol=s.energy_drift_tol)
    if s.kind == BOX:
        return build_box_scenario(s.n, s.length, s.particles, s.boundary, s.seeding, s.mass, cfg)
    e, f, c = build_double_slit_scenario(SlitGeometry(s.half_separation, s.width), s.particles,
                                         s.duration, s.sigma_mode, s.mass, cfg)
    if s.boundary != INTERIOR:
        raise ValueError("the double slit runs in free space; only interior boundary mode applies")
    return e, f, c
