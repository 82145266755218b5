"""Recurrence periods of the first three box states, chain vs exact."""
import argparse
import logging

from mqd import quantum
from mqd.experiments import REFERENCE_PERIODS_PS, box_report, run_box
from mqd.scenarios import BOX, ScenarioSpec

ap = argparse.ArgumentParser()
ap.add_argument("--particles", type=int, default=101)
ap.add_argument("--boundary", default="mirror", choices=("mirror", "interior"))
ap.add_argument("--seeding", default="lobe", choices=("lobe", "quantile"))
ap.add_argument("--report", help="write a JSON report here")
args = ap.parse_args()
logging.basicConfig(level=logging.INFO, format="%(message)s")

results = [run_box(ScenarioSpec(BOX, n=n, particles=args.particles, boundary=args.boundary, seeding=args.seeding))
           for n in (1, 2, 3)]
print(f"{'n':>2} {'T_chain':>9} {'T_exact':>9} {'T_ref':>7} {'depth':>7} {'E_micro':>9} {'E_box':>9}")
for r in results:
    n = r.spec.n
    print(f"{n:>2} {r.period or float('nan'):9.3f} {r.expected_period:9.3f} {REFERENCE_PERIODS_PS[n]:7.2f} "
          f"{r.estimate.recurrence_depth if r.estimate else float('nan'):7.3f} "
          f"{r.energy_micro or float('nan'):9.4f} {quantum.box_energy(n):9.4f}")
t = [r.period for r in results]
if all(t):
    print(f"T1/T2 = {t[0] / t[1]:.3f}   T1/T3 = {t[0] / t[2]:.3f}")
if args.report:
    with open(args.report, "w") as fh:
        fh.write(box_report(results).to_json())
