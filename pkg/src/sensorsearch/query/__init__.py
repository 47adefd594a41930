from .ast import (
    EQUALITY_EPSILON,
    Atom,
    CategoricalEq,
    Comparison,
    FilterExpr,
    RangeUnion,
)
from .evaluate import EvalDiagnostics, count_matches, evaluate, evaluate_indices
from .parser import parse_filter

__all__ = [
    "EQUALITY_EPSILON",
    "Atom",
    "CategoricalEq",
    "Comparison",
    "FilterExpr",
    "RangeUnion",
    "EvalDiagnostics",
    "count_matches",
    "evaluate",
    "evaluate_indices",
    "parse_filter",
]
