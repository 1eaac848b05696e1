"""Big-M penalized area problems, parametric pieces and region enumeration."""

from .penalty import (
    BigMReport,
    PenalizedAreaProblem,
    bigM_reformulate,
    default_big_m,
    verify_bigM_equivalence,
)
from .piece import ParametricPiece, ParametricQp, combine_pieces, evaluate_at
from .regions import enumerate_regions_bruteforce, shared_facet_points

__all__ = [
    "PenalizedAreaProblem",
    "BigMReport",
    "bigM_reformulate",
    "default_big_m",
    "verify_bigM_equivalence",
    "ParametricQp",
    "ParametricPiece",
    "evaluate_at",
    "combine_pieces",
    "enumerate_regions_bruteforce",
    "shared_facet_points",
]
