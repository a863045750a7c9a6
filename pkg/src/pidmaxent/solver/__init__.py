"""Entropy-type minimization over fixed-marginal polytopes."""
from .ipm import FAILED, INACCURATE, OPTIMAL, SolveReport, Tolerances, classify, solve, violations
from .kernels import BACKEND
from .program import ConeProgram, build_program

__all__ = [
    "BACKEND",
    "ConeProgram",
    "FAILED",
    "INACCURATE",
    "OPTIMAL",
    "SolveReport",
    "Tolerances",
    "build_program",
    "classify",
    "solve",
    "violations",
]
