"""
Full versus reduced across sample sizes
=======================================

Repeat the simulate-and-fit loop over a grid of sample sizes and average
the fit statistics and the target error.
"""

from markovprune import SweepSpec, fixtures, run_sweep
from markovprune.bench import rows_to_csv

spec = SweepSpec(fixtures.load("ex2"), n_grid=[50, 100, 200], reps=100, seed=0)
rows = run_sweep(spec)

# %%
table = {(r.n, r.variant, r.metric): r.mean for r in rows}
print("   n  metric    full   reduced")
for n in spec.n_grid:
    for metric in ("chi2", "rmsea", "pvalue", "mae"):
        print(f"{n:4d}  {metric:7s} {table[n, 'full', metric]:7.3f} {table[n, 'reduced', metric]:7.3f}")

# %%
# The same rows as CSV, ready for plotting elsewhere.
print(rows_to_csv(rows).splitlines()[:4])
