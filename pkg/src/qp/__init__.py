"""Dense LP/QP solver with exact active sets."""

from .active_set import solve_lp, solve_qp
from .kkt import KktReport, check_kkt
from .problem import QpProblem, QpSolution, SolveStatus

__all__ = [
    "QpProblem",
    "QpSolution",
    "SolveStatus",
    "solve_qp",
    "solve_lp",
    "check_kkt",
    "KktReport",
]
