"""Constrained Bayesian networks: symbolic marginals, may/must judgments,
bracketing of sup and inf, constrained union and sensitivity values.

Rationals are returned as fractions.Fraction; deltas and values accept
str, int, float or Fraction.
"""

from ._pycbn import (
    Model,
    ModelError,
    ParseError,
    SolverError,
    UnsupportedQuery,
    compose,
    evaluate,
    generate_random,
    inf,
    install_marginal,
    judge,
    load_model,
    marginal,
    sensitivity,
    sensitivity_formula,
    sup,
    validate,
)

__all__ = [
    "Model",
    "ModelError",
    "ParseError",
    "SolverError",
    "UnsupportedQuery",
    "compose",
    "evaluate",
    "generate_random",
    "inf",
    "install_marginal",
    "judge",
    "load_model",
    "marginal",
    "sensitivity",
    "sensitivity_formula",
    "sup",
    "validate",
]
