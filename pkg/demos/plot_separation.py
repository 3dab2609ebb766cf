"""
Reading independencies off a graph
==================================

Chains, forks and colliders, and what conditioning does to each.
"""

from markovprune import CausalGraph, d_separated, implied_independencies, markov_blanket
from markovprune import fixtures

# %%
# A chain is blocked by its middle node, a collider is opened by it.
chain = CausalGraph("ABC", [("A", "B"), ("B", "C")])
collider = CausalGraph("ABC", [("A", "B"), ("C", "B")])
print("chain    A _||_ C | B :", d_separated(chain, "A", "C", "B"))
print("collider A _||_ C     :", d_separated(collider, "A", "C"))
print("collider A _||_ C | B :", d_separated(collider, "A", "C", "B"))

# %%
# Every pairwise statement with at most two conditioning variables.
ex1 = fixtures.load("ex1").graph
for st in implied_independencies(ex1, 2):
    print(st)

# %%
# Conditioning on the Markov blanket of X cuts it off from the rest.
mb = markov_blanket(ex1, {"X"})
print("blanket of X:", sorted(mb))
print("X _||_ Y | blanket:", d_separated(ex1, "X", "Y", mb))

# %%
# Latent nodes act through the graph but cannot be conditioned on. In ex3,
# adjusting for the language score L opens C -> L <- U -> M.
ex3 = fixtures.load("ex3").graph
print(d_separated(ex3, "C", "M", {"S", "H", "Q", "L"}))
