"""
Reducing a model to its target
==============================

Which variables are needed to estimate an effect, which regression to run,
and which variables never need collecting.
"""

from markovprune import adjustment_sets, fixtures, project, reduce

# %%
# Two ways to close the backdoor paths from X to Y in ex2.
ex2 = fixtures.load("ex2")
for s in adjustment_sets(ex2.graph, "X", "Y"):
    print("adjust for", s)

# %%
# The reduction keeps the smallest set and reports what is dropped.
red = reduce(ex2)
print(red.to_text())

# %%
# A mediation target splits into one regression per stage.
print(reduce(fixtures.load("ex2_mediation")).plan_lines())

# %%
# Extra parents of the outcome can be kept for precision.
print(reduce(ex2, keep_precision=True).plan_lines())

# %%
# Marginalizing the latent confounder of ex4 leaves a bidirected edge, and
# the reduction adjusts for C, which sits on that path.
ex4 = fixtures.load("ex4")
g = project(ex4.graph, ["S", "C", "R"])
print(g.directed_edges, g.bidirected_edges)
print(reduce(ex4).plan_lines())
