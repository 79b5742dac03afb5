"""Stable models of ground logic programs with basic, choice, cardinality and weight rules."""
from .core import Literal, OptimizeStatement, OptKind, Program, Rule, RuleKind, RawStatement, build_program
from .propagate import PropState
from .search import SearchOptions, SearchOutcome, choice_point_set, enumerate_models, find_optimal_oracle, optimize, solve
from .semantics import enumerate_bruteforce, is_stable, well_founded
from .textio import ParseError, parse, render

__all__ = [
    "Literal", "OptimizeStatement", "OptKind", "Program", "Rule", "RuleKind", "RawStatement", "build_program",
    "PropState", "SearchOptions", "SearchOutcome", "choice_point_set", "enumerate_models", "find_optimal_oracle",
    "optimize", "solve", "enumerate_bruteforce", "is_stable", "well_founded", "ParseError", "parse", "render",
]
