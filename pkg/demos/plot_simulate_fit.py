"""
Checking a reduction on simulated data
======================================

Simulate from the full model, fit both the full and the reduced path
model, and compare the target estimates with the true effect.
"""

from markovprune import fill_coefficients, fit, fixtures, reduce, simulate, true_effect
from markovprune.fit import target_metrics

model = fixtures.load("ex1")
coef = fill_coefficients(model, seed=0)
target = model.targets[0]
truth = true_effect(model.graph, coef, target)
print("true effect", truth)

# %%
data = simulate(model.graph, coef, n=2000, seed=1)
full = fit(model.graph, data)
reduced = fit(reduce(model).graph, data)

# %%
# The full model is tested against four constraints; the reduced model is
# saturated, so its chi2 is zero.
for name, res in [("full", full), ("reduced", reduced)]:
    m = target_metrics(res, target, truth)
    print(f"{name:8s} chi2={res.chi2:6.2f} df={res.df} cfi={res.cfi:.3f} "
          f"estimate={m.estimate:.3f} se={m.se:.3f} p={m.p_value:.2g}")
