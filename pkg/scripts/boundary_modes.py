"""Compare boundary treatments and seedings for the box states.

Prints period, recurrence depth, energy drift and wall bounces for every
combination; this is the evidence behind the default (mirror, lobe).
"""
import itertools

from mqd.experiments import run_box
from mqd.scenarios import BOX, ScenarioSpec

rows = []
for boundary, seeding, n in itertools.product(("mirror", "interior"), ("lobe", "quantile"), (1, 2, 3)):
    if n == 1 and seeding == "quantile":
        continue   # identical to lobe for the ground state
    r = run_box(ScenarioSpec(BOX, n=n, boundary=boundary, seeding=seeding))
    d = r.trajectory.diagnostics
    rows.append((boundary, seeding, n, r.period, r.estimate.recurrence_depth if r.estimate else None,
                 d["max_energy_drift"], d["wall_bounces"], r.expected_period))

print(f"{'boundary':9} {'seeding':9} {'n':>2} {'T':>8} {'T_exact':>8} {'depth':>7} {'drift':>9} {'bounces':>8}")
for b, s, n, t, depth, drift, bounces, exact in rows:
    ts = f"{t:8.3f}" if t else "    none"
    ds = f"{depth:7.3f}" if depth is not None else "      -"
    print(f"{b:9} {s:9} {n:>2} {ts} {exact:8.3f} {ds} {drift:9.2e} {bounces:>8}")
