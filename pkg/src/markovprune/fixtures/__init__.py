"""Worked-example models shipped with the package.

``ex1`` .. ``ex4`` follow the four worked examples (``ex2_mediation`` and
``ex3_mediation`` carry the mediation questions); ``ex5`` is a synthetic
two-chain model.
"""

from importlib import resources

from ..dsl import ModelFile, parse

NAMES = ("ex1", "ex2", "ex2_mediation", "ex3", "ex3_mediation", "ex4", "ex5")


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.dgp").read_text(encoding="utf-8")


def load(name: str) -> ModelFile:
    return parse(text(name))


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.dgp")
