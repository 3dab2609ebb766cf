"""Prune structural causal models down to what a research question needs.

Given a full data-generating model and target effects, :func:`reduce`
returns the smallest structural model and regression plan that still
estimates the targets without bias, together with the variables that need
not be collected. Simulation and fit tools check the reduction on data.
"""

from .ci import CiStatement, d_separated, implied_independencies, markov_blanket
from .dsl import ModelFile, TargetEffect, mediation, parse, serialize, total
from .errors import (
    FitError,
    GraphError,
    MarkovPruneError,
    NotIdentifiable,
    ParseError,
    ReductionError,
    SeparationError,
    SweepError,
)
from .fit import FitResult, PathModel, fit, target_metrics
from .graph import CausalGraph, Violation, validate
from .reducer import AdjustmentSet, ReducedModel, adjustment_sets, project, reduce
from .sim import CoefficientAssignment, Dataset, fill_coefficients, simulate, true_effect
from .bench import SweepRow, SweepSpec, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AdjustmentSet", "CausalGraph", "CiStatement", "CoefficientAssignment", "Dataset",
    "FitError", "FitResult", "GraphError", "MarkovPruneError", "ModelFile",
    "NotIdentifiable", "ParseError", "PathModel", "ReducedModel", "ReductionError",
    "SeparationError", "SweepError", "SweepRow", "SweepSpec", "TargetEffect", "Violation",
    "adjustment_sets", "d_separated", "fill_coefficients", "fit", "implied_independencies",
    "markov_blanket", "mediation", "parse", "project", "reduce", "run_sweep", "serialize",
    "simulate", "target_metrics", "total", "true_effect", "validate",
]
