"""Plug-in information quantities of a :class:`JointDistribution`, in bits."""
from __future__ import annotations

from collections.abc import Iterable, Mapping

import numpy as np

from .distributions import JointDistribution, _check_vars, marginal_codes

__all__ = [
    "entropy",
    "joint_entropy",
    "conditional_entropy",
    "mutual_information",
    "conditional_mutual_information",
    "co_information",
]


def _h(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(table) -> float:
    """Shannon entropy of a probability table (mapping or array), 0 log 0 = 0."""
    if isinstance(table, JointDistribution):
        return _h(table.probs)
    if isinstance(table, Mapping):
        table = list(table.values())
    return _h(np.fromiter(table, dtype=float))


def joint_entropy(dist: JointDistribution, vars_: Iterable[int]) -> float:
    vars_ = _check_vars(dist.nvars, tuple(vars_))
    if not vars_:
        return 0.0
    if len(vars_) == dist.nvars:
        return _h(dist.probs)
    return _h(marginal_codes(dist, sorted(vars_))[1])


def _as_set(dist, vs, name):
    if isinstance(vs, (int, np.integer)):
        vs = (vs,)
    return set(_check_vars(dist.nvars, tuple(vs)))


def conditional_entropy(dist: JointDistribution, target=0, given=()) -> float:
    """H(target | given)."""
    a = _as_set(dist, target, "target")
    g = _as_set(dist, given, "given")
    return joint_entropy(dist, a | g) - joint_entropy(dist, g)


def conditional_mutual_information(dist, target, sources, given=()) -> float:
    """MI(target; sources | given); may be a few ulps below zero."""
    a = _as_set(dist, target, "target")
    s = _as_set(dist, sources, "sources")
    g = _as_set(dist, given, "given")
    s, a = s - g, a - g
    h = joint_entropy
    return h(dist, a | g) + h(dist, s | g) - h(dist, a | s | g) - h(dist, g)


def mutual_information(dist: JointDistribution, target=0, sources=None) -> float:
    """MI(target; sources). ``sources=None`` means all non-target variables."""
    if sources is None:
        t = _as_set(dist, target, "target")
        sources = [v for v in range(dist.nvars) if v not in t]
    return conditional_mutual_information(dist, target, sources)


def co_information(dist, target, a, b, given=()) -> float:
    """CoI(target; a; b | given) = MI(target; a | given) - MI(target; a | b, given).

    May be negative.
    """
    g = _as_set(dist, given, "given")
    bg = _as_set(dist, b, "b") | g
    return (conditional_mutual_information(dist, target, a, g)
            - conditional_mutual_information(dist, target, a, bg))
