"""Exact demand-parametric Wardrop equilibria for piecewise linear costs."""

from .costs import PiecewiseLinearCost, evaluate_cost, evaluate_inverse, invert_cost, make_cost
from .homotopy import SolutionCurve, run, sample
from .instances import Instance, nested_braess, paper_example
from .network import Network, build_network

__all__ = [
    "Instance",
    "Network",
    "PiecewiseLinearCost",
    "SolutionCurve",
    "build_network",
    "evaluate_cost",
    "evaluate_inverse",
    "invert_cost",
    "make_cost",
    "nested_braess",
    "paper_example",
    "run",
    "sample",
]
