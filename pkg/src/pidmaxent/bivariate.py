"""Bivariate maximum-entropy (BROJA) decomposition.

One minimization of ``MI(T; A, B)`` over the distributions sharing the
``(T, A)`` and ``(T, B)`` marginals gives all four parts:

* ``CI   = MI(T; A, B) - min``
* ``UI_A = min - MI(T; B)``  (``MI(T; B)`` is constant over the polytope)
* ``UI_B = min - MI(T; A)``
* ``SI   = MI(T; A) - UI_A``
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .distributions import VAR_NAMES, JointDistribution, MarginalSpec
from .errors import ArityMismatch, SolverFailed
from .info import mutual_information
from .solver import FAILED, SolveReport, Tolerances, build_program, solve, violations

__all__ = ["BivariatePid", "broja", "broja_groups"]


@dataclass(frozen=True)
class BivariatePid:
    CI: float
    UI_A: float
    UI_B: float
    SI: float
    violations: tuple
    report: SolveReport | None = None

    def as_dict(self) -> dict:
        return {"CI": self.CI, "UI_A": self.UI_A, "UI_B": self.UI_B, "SI": self.SI}

    def total(self) -> float:
        return self.CI + self.UI_A + self.UI_B + self.SI


def _name(group) -> str:
    return "".join(VAR_NAMES[v] for v in sorted(group))


def broja_groups(dist: JointDistribution, a, b, tol: Tolerances | None = None) -> BivariatePid:
    """Bivariate decomposition with composite sources given as index groups.

    The polytope lives on the original variables: only the ``(T, a)`` and
    ``(T, b)`` marginals are pinned, so groups may share variables (for
    example ``a = {X, Y}``, ``b = {X, Z}``).

    Raises
    ------
    SolverFailed
        The minimization ended with status ``Failed``.
    """
    a, b = frozenset(a), frozenset(b)
    tol = tol or Tolerances()
    spec = MarginalSpec.from_distribution(dist, [a, b])
    rep = solve(build_program(dist, spec, a | b), tol)
    if rep.status == FAILED:
        raise SolverFailed(f"bivariate solve for ({_name(a)}, {_name(b)}) failed: "
                           f"pres={rep.pres:.2e} dres={rep.dres:.2e} gap={rep.gap:.2e}")
    m = rep.optimal_value
    mi = mutual_information(dist, 0, tuple(a | b))
    mi_a = mutual_information(dist, 0, tuple(a))
    mi_b = mutual_information(dist, 0, tuple(b))
    ui_a = m - mi_b
    ui_b = m - mi_a
    return BivariatePid(CI=mi - m, UI_A=ui_a, UI_B=ui_b, SI=mi_a - ui_a,
                        violations=violations(rep, tol), report=rep)


def _swapped(dist: JointDistribution) -> JointDistribution:
    codes = dist.codes[:, [0, 2, 1]]
    order = np.lexsort(codes.T[::-1])
    labels = (dist.labels[0], dist.labels[2], dist.labels[1])
    return JointDistribution(labels, codes[order], dist.probs[order])


def broja(dist: JointDistribution, tol: Tolerances | None = None) -> BivariatePid:
    """Decompose ``MI(T; A, B)`` of a two-source distribution.

    The solve always runs on the source order with the smaller encoded
    table, so exchanging the sources exchanges the unique parts exactly
    instead of up to the solver tolerance.

    Raises
    ------
    ArityMismatch
        ``dist`` does not have exactly two sources.
    SolverFailed
    """
    if dist.arity != 2:
        raise ArityMismatch(f"broja needs two sources, got {dist.arity}")
    other = _swapped(dist)
    if (other.codes.tolist(), other.probs.tolist()) < (dist.codes.tolist(), dist.probs.tolist()):
        r = broja_groups(other, {1}, {2}, tol)
        return replace(r, UI_A=r.UI_B, UI_B=r.UI_A)
    return broja_groups(dist, {1}, {2}, tol)
