"""Discrete chain force vs Bohm quantum force for several densities."""
import numpy as np

from mqd.continuum import convergence_study, discrete_vs_quantum_force
from mqd.core import SlitGeometry
from mqd.scenarios import DensityProfile

sizes = (50, 100, 200, 400, 800)
profiles = [DensityProfile.gaussian(10.0), DensityProfile.gaussian(20.0),
            DensityProfile.two_packet(SlitGeometry(30.0, 10.0))]
for p in profiles:
    rep = convergence_study(p, sizes)
    errs = "  ".join(f"{e:.2e}" for e in rep.errors)
    print(f"{p.name:22} order {rep.order:5.2f}  monotone {rep.monotone}  errors {errs}")

c = discrete_vs_quantum_force(DensityProfile.gaussian(10.0), 400)
sl = c.interior
print("\n   x [nm]   F_chain   F_bohm")
for i in np.linspace(sl.start, sl.stop - 1, 9).astype(int):
    print(f"{c.positions[i]:9.3f} {c.discrete[i]:9.4f} {c.analytic[i]:9.4f}")
