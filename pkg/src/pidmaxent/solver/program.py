"""Conic formulation of ``min MI(T; S)`` over a fixed-marginal polytope.

The minimization is carried out in nats over ``f(q) = -H(T | S)``; since the
target marginal is pinned by every group, ``MI(T; S) = H(T) + f(q)``.

Before building constraint rows the problem is shrunk:

* a source outside the objective that lies in no pinned group is dropped;
* a source outside the objective that lies in exactly one pinned group ``G``,
  where ``G`` minus that source is covered by another group, is dropped
  together with ``G``. Any feasible point of the shrunk problem extends to
  the full space by ``Q * P(v | G - v)`` without changing the objective.

Afterwards the variables live on the join of the pinned supports, minus the
entries that vanish in every feasible point, and linearly dependent marginal
rows are removed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linprog

from ..distributions import (
    JointDistribution,
    MarginalSpec,
    VAR_NAMES,
    from_pairs,
    marginal,
)
from ..errors import BadIndex, EmptyPart, InfeasibleSpec

__all__ = ["ConeProgram", "build_program"]

# consistency slack for comparing the reference point with pinned tables
_REFIT_TOL = 1e-14
_FEAS_TOL = 1e-9


@dataclass(eq=False)
class ConeProgram:
    """One entropy-type minimization ready for :func:`solve`.

    Variables are the support tuples of ``support`` (columns follow
    ``kept_vars``), ordered so that equal ``(S, T)`` values form contiguous
    *cells* and equal ``S`` values contiguous *blocks*. Each cell is one
    exponential-cone block of the conic form.
    """

    dist: JointDistribution
    spec: MarginalSpec
    objective: tuple[int, ...]
    kept_vars: tuple[int, ...]
    support: np.ndarray
    A_full: np.ndarray
    b_full: np.ndarray
    A: np.ndarray
    b: np.ndarray
    cell_ptr: np.ndarray
    blk_ptr: np.ndarray
    reference: np.ndarray
    h_target: float
    drops: list = field(default_factory=list)
    row_groups: list = field(default_factory=list)
    target_marginal: np.ndarray | None = None
    fixed_value: float | None = None
    fixed_reason: str = ""

    @property
    def n_vars(self) -> int:
        return len(self.reference)

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_cones(self) -> int:
        return len(self.cell_ptr) - 1

    @property
    def n_blocks(self) -> int:
        return len(self.blk_ptr) - 1

    @property
    def is_fixed(self) -> bool:
        return self.fixed_value is not None

    def describe(self) -> str:
        obj = "".join(VAR_NAMES[v] for v in self.objective)
        pins = ", ".join("T" + "".join(VAR_NAMES[v] for v in sorted(g)) for g in self.spec.groups)
        return f"min MI(T;{obj}) s.t. {pins} pinned"

    def objective_nats(self, q) -> float:
        """``-H(T | S)`` in nats of a nonnegative vector on the support."""
        q = np.asarray(q, dtype=float)
        qc = np.add.reduceat(q, self.cell_ptr[:-1])
        qs = np.add.reduceat(qc, self.blk_ptr[:-1])
        qs_c = np.repeat(qs, np.diff(self.blk_ptr))
        pos = qc > 0
        return float(np.sum(qc[pos] * np.log(qc[pos] / qs_c[pos])))

    def value_bits(self, f_nats: float) -> float:
        return (self.h_target + f_nats) / math.log(2)

    def extend(self, q) -> JointDistribution:
        """Lift a point of the shrunk problem to a distribution over all variables."""
        q = np.clip(np.asarray(q, dtype=float), 0.0, None)
        cur_vars = list(self.kept_vars)
        rows = {tuple(r): p for r, p in zip(self.support.tolist(), q.tolist()) if p > 0}
        for v, cond, table in reversed(self.drops):
            pos = [cur_vars.index(c) for c in cond]
            # conditional P(v | cond) in code space
            tv = table.variables
            ci = [tv.index(c) for c in cond]
            vi = tv.index(v)
            lab = self.dist.labels
            cond_mass: dict = {}
            joint: dict = {}
            for key, p in table.items():
                ck = tuple(_code(lab, c, key[i]) for c, i in zip(cond, ci))
                cond_mass[ck] = cond_mass.get(ck, 0.0) + p
                joint.setdefault(ck, []).append((_code(lab, v, key[vi]), p))
            new = {}
            for r, p in rows.items():
                ck = tuple(r[i] for i in pos)
                tot = cond_mass[ck]
                for code, pv in joint[ck]:
                    new[r + (code,)] = p * pv / tot
            rows = new
            cur_vars.append(v)
        order = [cur_vars.index(v) for v in range(self.dist.nvars)]
        lab = self.dist.labels
        entries = {}
        for r, p in rows.items():
            entries[tuple(lab[v][r[i]] for v, i in zip(range(self.dist.nvars), order))] = p
        return from_pairs(entries)


def _code(labels, var, sym):
    try:
        return labels[var].index(sym)
    except ValueError:
        raise BadIndex(f"symbol {sym!r} of variable {var} not in the reference alphabet") from None


def _group_table(dist, table):
    """Pinned table as (code rows, masses) over its variables."""
    rows, vals = [], []
    for key, p in table.items():
        if p > 0:
            rows.append([_code(dist.labels, v, s) for v, s in zip(table.variables, key)])
            vals.append(p)
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(table.variables)), np.array(vals)


def _join(cols, rows, new_cols, new_rows):
    """Natural join of two code relations."""
    shared = [c for c in new_cols if c in cols]
    extra = [c for c in new_cols if c not in cols]
    si = [cols.index(c) for c in shared]
    ni = [new_cols.index(c) for c in shared]
    ei = [new_cols.index(c) for c in extra]
    index: dict = {}
    for r in new_rows.tolist():
        index.setdefault(tuple(r[i] for i in ni), []).append([r[i] for i in ei])
    out = []
    for r in rows.tolist():
        for tail in index.get(tuple(r[i] for i in si), ()):
            out.append(r + tail)
    return cols + extra, np.array(out, dtype=np.int64).reshape(len(out), len(cols) + len(extra))


def _mi_bits(table, target_pos, source_pos) -> float:
    pa, ps, pj = {}, {}, {}
    for key, p in table.items():
        a = key[target_pos]
        s = tuple(key[i] for i in source_pos)
        pa[a] = pa.get(a, 0.0) + p
        ps[s] = ps.get(s, 0.0) + p
        pj[(a, s)] = pj.get((a, s), 0.0) + p
    return sum(p * math.log2(p / (pa[a] * ps[s])) for (a, s), p in pj.items() if p > 0)


def _reduce(groups, objective, nvars):
    """Apply the source-dropping rules; returns kept groups, kept vars, drop log."""
    groups = list(groups)
    # groups contained in another group add no constraint
    groups = [g for g in groups if not any(g < h for h in groups)]
    kept = set(range(nvars))
    drops = []
    changed = True
    while changed:
        changed = False
        for v in sorted(kept - {0} - set(objective)):
            holders = [g for g in groups if v in g]
            if not holders:
                kept.discard(v)
                drops.append((v, None))
                changed = True
                break
            if len(holders) == 1:
                g = holders[0]
                rest = g - {v}
                if any(rest <= h for h in groups if h is not g):
                    groups.remove(g)
                    kept.discard(v)
                    drops.append((v, g))
                    changed = True
                    break
    return groups, tuple(sorted(kept)), drops


def build_program(dist: JointDistribution, pinned: MarginalSpec, objective) -> ConeProgram:
    """Formulate ``min MI(T; objective)`` over the polytope fixed by ``pinned``.

    Parameters
    ----------
    dist : JointDistribution
        Reference distribution; supplies alphabets and a feasible point.
    pinned : MarginalSpec
        Target-with-group marginals held fixed.
    objective : iterable of int
        Source indices whose joint information about the target is minimized.

    Raises
    ------
    EmptyPart
        Empty objective.
    BadIndex
        Indices outside ``1..arity``.
    InfeasibleSpec
        The pinned tables admit no joint distribution.
    """
    objective = tuple(sorted(set(int(v) for v in objective)))
    if not objective:
        raise EmptyPart("objective group is empty")
    for v in objective:
        if not 1 <= v <= dist.arity:
            raise BadIndex(f"objective source {v} outside 1..{dist.arity}")
    for g in pinned.groups:
        for v in g:
            if not 1 <= v <= dist.arity:
                raise BadIndex(f"pinned source {v} outside 1..{dist.arity}")

    full_groups = [frozenset({0}) | g for g in pinned.groups]
    tables = dict(zip(full_groups, pinned.values))
    t_marg = [marginal(tab, (0,)) for tab in pinned.values]
    for tm in t_marg[1:]:
        keys = set(tm) | set(t_marg[0])
        if any(abs(tm.get(k, 0.0) - t_marg[0].get(k, 0.0)) > _FEAS_TOL for k in keys):
            raise InfeasibleSpec("pinned tables disagree on the target marginal")
    t_vec = np.zeros(dist.alphabet_sizes[0])
    for key, p in t_marg[0].items():
        t_vec[_code(dist.labels, 0, key[0])] += p
    pt = t_vec[t_vec > 0]
    h_target = float(-(pt * np.log(pt)).sum())

    groups, kept, drop_log = _reduce(full_groups, objective, dist.nvars)
    drops = []
    for v, g in drop_log:
        if g is None:
            drops.append((v, (), marginal(dist, (v,))))
        else:
            drops.append((v, tuple(sorted(g - {v})), tables[g]))

    # support: join of pinned supports, free product for uncovered kept vars
    cols, rows = [], np.zeros((1, 0), dtype=np.int64)
    gdata = []
    for g in sorted(groups, key=lambda g: (-len(g), sorted(g))):
        gvars = tuple(sorted(g))
        grows, gvals = _group_table(dist, tables[g])
        gdata.append((gvars, grows, gvals))
        cols, rows = _join(cols, rows, list(gvars), grows)
    for v in kept:
        if v not in cols:
            free = np.arange(dist.alphabet_sizes[v], dtype=np.int64).reshape(-1, 1)
            cols, rows = _join(cols, rows, [v], free)
    order = [cols.index(v) for v in kept]
    support = rows[:, order]
    if len(support) == 0:
        raise InfeasibleSpec("pinned supports have empty join")

    support, cell_ptr, blk_ptr, A_full, b_full, row_groups = _assemble(support, kept, objective, gdata)
    n = len(support)

    # reference point: marginal of dist on the kept variables
    reference = _reference_point(dist, kept, support)
    if reference is None or np.max(np.abs(A_full @ reference - b_full)) > _FEAS_TOL:
        reference = _feasible_point(A_full, b_full)
    elif np.max(np.abs(A_full @ reference - b_full)) <= _REFIT_TOL:
        # tables summed in another order can disagree in the last bits, which
        # is enough to pin a tiny-mass entry to exactly zero; take the rows
        # from the input itself so it stays a strictly positive feasible point
        b_full = A_full @ reference
    if np.min(reference) <= 0:
        # entries zero in every feasible point leave the polytope without interior
        live = _live_entries(A_full, b_full, reference > 0)
        if not live.all():
            support = support[live]
            support, cell_ptr, blk_ptr, A_full, b_full, row_groups = _assemble(support, kept, objective, gdata)
            reference = reference[live]
            n = len(support)
    proj_counts = [sl.stop - sl.start for sl in row_groups]

    prog = ConeProgram(
        dist=dist, spec=pinned, objective=objective, kept_vars=kept, support=support,
        A_full=A_full, b_full=b_full, A=A_full, b=b_full,
        cell_ptr=cell_ptr, blk_ptr=blk_ptr, reference=reference,
        h_target=h_target, drops=drops, row_groups=row_groups,
        target_marginal=t_vec,
    )

    need = frozenset({0}) | frozenset(objective)
    for g in full_groups:
        if need <= g:
            tab = tables[g]
            prog.fixed_value = _mi_bits(tab, 0, [tab.variables.index(v) for v in objective])
            prog.fixed_reason = "objective marginal is pinned"
            return prog
    if any(c == n for c in proj_counts):
        prog.fixed_value = prog.value_bits(prog.objective_nats(reference))
        prog.fixed_reason = "feasible set is a single point"
        return prog

    A, b = _independent_rows(A_full, b_full)
    if A.shape[0] == n:
        prog.fixed_value = prog.value_bits(prog.objective_nats(reference))
        prog.fixed_reason = "feasible set is a single point"
        return prog
    prog.A, prog.b = A, b
    return prog


def _assemble(support, kept, objective, gdata):
    """Order the support into cells and blocks and build the marginal rows."""
    # variable order: by objective codes, then target, then the rest
    opos = [kept.index(v) for v in objective]
    rest = [i for i in range(len(kept)) if i not in opos and i != 0]
    keys = [support[:, i] for i in reversed(rest)] + [support[:, 0]] + [support[:, i] for i in reversed(opos)]
    support = support[np.lexsort(keys)] if keys else support
    sc = support[:, opos + [0]]
    cell_start = np.r_[True, np.any(sc[1:] != sc[:-1], axis=1)]
    cell_ptr = np.r_[np.flatnonzero(cell_start), len(support)].astype(np.int64)
    so = support[cell_ptr[:-1]][:, opos]
    blk_start = np.r_[True, np.any(so[1:] != so[:-1], axis=1)]
    blk_ptr = np.r_[np.flatnonzero(blk_start), len(so)].astype(np.int64)

    # constraint rows, one per pinned support entry
    n = len(support)
    A_blocks, b_parts, row_groups = [], [], []
    start = 0
    for gvars, grows, gvals in gdata:
        gi = [kept.index(v) for v in gvars]
        lookup = {tuple(r): k for k, r in enumerate(grows.tolist())}
        idx = np.array([lookup[tuple(r)] for r in support[:, gi].tolist()], dtype=np.int64)
        Ag = np.zeros((len(grows), n))
        Ag[idx, np.arange(n)] = 1.0
        A_blocks.append(Ag)
        b_parts.append(gvals)
        row_groups.append(slice(start, start + len(grows)))
        start += len(grows)
    if not A_blocks:
        # nothing pinned on the kept variables beyond unit mass
        A_blocks.append(np.ones((1, n)))
        b_parts.append(np.ones(1))
    return support, cell_ptr, blk_ptr, np.vstack(A_blocks), np.concatenate(b_parts), row_groups


def _live_entries(A, b, known):
    """Mask of entries positive in some feasible point.

    ``known`` marks entries already seen positive. Each linear program
    maximizes the capped mass on the undecided entries: a zero optimum proves
    them all zero, otherwise at least one more entry is shown positive.
    """
    live = known.copy()
    n = A.shape[1]
    while not live.all():
        cand = np.flatnonzero(~live)
        k = len(cand)
        # variables: q (n), s (k); max sum s with s <= q[cand], s <= 1
        c = np.r_[np.zeros(n), -np.ones(k)]
        A_eq = np.hstack([A, np.zeros((A.shape[0], k))])
        A_ub = np.zeros((k, n + k))
        A_ub[np.arange(k), cand] = -1.0
        A_ub[np.arange(k), n + np.arange(k)] = 1.0
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(k), A_eq=A_eq, b_eq=b,
                      bounds=[(0, None)] * n + [(0, 1)] * k, method="highs")
        if res.status != 0:
            break
        pos = res.x[n:] > _FEAS_TOL
        if not pos.any():
            break
        live[cand[pos]] = True
    return live


def _reference_point(dist, kept, support):
    sub = dist.codes[:, list(kept)]
    index = {tuple(r): i for i, r in enumerate(support.tolist())}
    q = np.zeros(len(support))
    for r, p in zip(sub.tolist(), dist.probs.tolist()):
        i = index.get(tuple(r))
        if i is None:
            return None
        q[i] += p
    return q


def _feasible_point(A, b):
    res = linprog(np.zeros(A.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise InfeasibleSpec("pinned marginals admit no joint distribution")
    return np.clip(res.x, 0.0, None)


def _independent_rows(A, b):
    """Drop linearly dependent rows, preferring to keep rows of small mass.

    A tiny entry pinned by its own row must keep that row: recovered as a
    difference of rows of order one it is lost to rounding. Weighting rows
    by ``b**-1/2`` makes the pivoted QR pick small-mass rows first.
    """
    weight = 1.0 / np.sqrt(np.clip(b, 1e-16, None))
    W = A.T * weight
    _, R, piv = scipy.linalg.qr(W, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    colnorm = np.linalg.norm(W, axis=0)[piv[: len(d)]]
    indep = d > 1e-9 * colnorm
    rank = int(np.argmin(indep)) if not indep.all() else len(d)
    keep = np.sort(piv[:rank])
    return A[keep], b[keep]
