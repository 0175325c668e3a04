"""How much do Poisson arrivals move the daily totals?

Runs the AS-IS model with deterministic and Poisson arrivals over the same
workday protocol and summarises the per-day spread with numpy.

Run with ``python demos/poisson_replications.py``.
"""

from __future__ import annotations

import numpy as np

from demobpr import SimConfig, fixture_path, parse_file, simulate

model = parse_file(fixture_path("barez-asis.demo"))
base = SimConfig(months=6, replications=3)

steady = simulate(model, base)
print(f"deterministic: {steady.sum_time} min, {steady.sum_cost} EUR per workday")

for seed in (0, 1, 2):
    run = simulate(model, SimConfig(months=6, replications=3, arrival_model="poisson", seed=seed))
    days = np.array([[float(t), float(c)] for t, c in run.day_totals])
    mean, std = days.mean(axis=0), days.std(axis=0, ddof=1)
    print(
        f"poisson seed {seed}: time {mean[0]:8.1f} +/- {std[0]:7.1f} min, "
        f"cost {mean[1]:7.1f} +/- {std[1]:6.1f} EUR over {len(days)} days"
    )
