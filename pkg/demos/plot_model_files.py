"""
Writing models as text
======================

The model language: edges, latent nodes, fixed coefficients and targets.
"""

from markovprune import ParseError, parse, serialize

# %%
text = """
# confounded treatment with a mediator
latent U
U -> T
U -> W
W -> Y
T -> M
M -> Y
coef T -> M = 0.5
noise Y = 2
target total(T, Y)
"""
model = parse(text)
print(model.graph.nodes, model.graph.latent)
print(model.targets)

# %%
# Serializing gives a canonical form that parses back to the same model.
canon = serialize(model)
print(canon)
assert parse(canon) == model

# %%
# All problems are reported at once, each with a line and column.
try:
    parse("A -> B\nB -> A\nA -> A\ncoef A -> C = 1\n")
except ParseError as exc:
    for d in exc.diagnostics:
        print(d.code, d)
