"""All eighteen lattice atoms of a three-source distribution.

Besides the trivariate decomposition this needs seven more minimizations of
``MI(T; X, Y, Z)``, each over a polytope that pins composite marginals:

* one source singled out: ``(T, XiXj)`` and ``(T, Xk)`` pinned (three solves);
* two overlapping pairs: ``(T, XiXj)`` and ``(T, XiXk)`` pinned (three solves);
* all three pairs ``(T, XY)``, ``(T, XZ)``, ``(T, YZ)`` pinned (one solve).

Each minimum fixes the synergy of a coarser bivariate split, and the atoms
follow by substitution starting from the top atom ``XYZ``.
"""
from __future__ import annotations

from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor

from .bivariate import BivariatePid, broja_groups
from .distributions import JointDistribution, MarginalSpec
from .errors import ArityMismatch, SolverFailed
from .info import mutual_information
from .lattice import accumulate, names
from .pipeline import PidResult, pid
from .solver import FAILED, SolveReport, Tolerances, build_program, solve

__all__ = ["ATOM_NAMES", "SYNERGY_ATOMS", "FineAtoms", "fine_decompose", "consistency_report"]

ATOM_NAMES = tuple(names(3))
SYNERGY_ATOMS = ATOM_NAMES[:8]

X, Y, Z = 1, 2, 3
_SINGLE = {  # singled-out source -> (pair group, singleton group)
    "X": ({Y, Z}, {X}),
    "Y": ({X, Z}, {Y}),
    "Z": ({X, Y}, {Z}),
}
_DOUBLE = {  # shared source -> the two overlapping pairs
    "X": ({X, Y}, {X, Z}),
    "Y": ({X, Y}, {Y, Z}),
    "Z": ({X, Z}, {Y, Z}),
}


class FineAtoms(Mapping):
    """Atom name -> value, in bits, with the sub-results that produced them.

    Attributes
    ----------
    pid : PidResult
    single, double : dict of BivariatePid
        Keyed by the singled-out source, or by the source shared by both pairs.
    triple : SolveReport
        Minimization with all three pairs pinned.
    """

    def __init__(self, values, *, pid=None, single=None, double=None, triple=None):
        self._values = {k: float(values[k]) for k in ATOM_NAMES}
        self.pid = pid
        self.single = single or {}
        self.double = double or {}
        self.triple = triple

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        return iter(ATOM_NAMES)

    def __len__(self):
        return len(ATOM_NAMES)

    def synergy(self) -> float:
        return sum(self._values[k] for k in SYNERGY_ATOMS)

    def as_dict(self) -> dict:
        return dict(self._values)

    def __repr__(self):
        body = ", ".join(f"{k}={v:.4g}" for k, v in self._values.items())
        return f"FineAtoms({body})"


def _triple_solve(dist, tol) -> SolveReport:
    spec = MarginalSpec.from_distribution(dist, [{X, Y}, {X, Z}, {Y, Z}])
    rep = solve(build_program(dist, spec, (X, Y, Z)), tol)
    if rep.status == FAILED:
        raise SolverFailed("solve with all three pairs pinned failed: "
                           f"pres={rep.pres:.2e} dres={rep.dres:.2e} gap={rep.gap:.2e}")
    return rep


def fine_decompose(dist: JointDistribution, tol: Tolerances | None = None,
                   parallel=False) -> FineAtoms:
    """Recover the eighteen atoms of ``MI(T; X, Y, Z)``.

    Parameters
    ----------
    dist : JointDistribution
        Three sources.
    tol : Tolerances, optional
    parallel : bool or {'on', 'off'}
        Run the independent minimizations concurrently; values do not change.

    Raises
    ------
    ArityMismatch
    SolverFailed
        Names the subsystem whose minimization failed.
    """
    if dist.arity != 3:
        raise ArityMismatch(f"fine_decompose needs three sources, got {dist.arity}")
    tol = tol or Tolerances()
    par = parallel.lower() == "on" if isinstance(parallel, str) else bool(parallel)

    jobs = {"pid": lambda: pid(dist, tol, parallel=par), "triple": lambda: _triple_solve(dist, tol)}
    for k, (pair, one) in _SINGLE.items():
        jobs[f"single {k}"] = lambda pair=pair, one=one: broja_groups(dist, pair, one, tol)
    for k, (a, b) in _DOUBLE.items():
        jobs[f"double {k}"] = lambda a=a, b=b: broja_groups(dist, a, b, tol)
    if par:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            futures = {k: pool.submit(f) for k, f in jobs.items()}
            out = {k: f.result() for k, f in futures.items()}
    else:
        out = {k: f() for k, f in jobs.items()}

    main: PidResult = out["pid"]
    single: dict[str, BivariatePid] = {k: out[f"single {k}"] for k in _SINGLE}
    double: dict[str, BivariatePid] = {k: out[f"double {k}"] for k in _DOUBLE}
    triple: SolveReport = out["triple"]
    return FineAtoms(_atoms_from(main, single, double, triple, mutual_information(dist, 0, (X, Y, Z))),
                     pid=main, single=single, double=double, triple=triple)


def _atoms_from(main, single, double, triple, mi_total) -> dict:
    v = main.components
    a = {"XYZ": mi_total - triple.optimal_value}
    # overlapping pairs: the synergy of (XiXj, XiXk) is the top atom plus the
    # pair atom of the two sources other than the shared one
    a["YZ"] = double["X"].CI - a["XYZ"]
    a["XZ"] = double["Y"].CI - a["XYZ"]
    a["XY"] = double["Z"].CI - a["XYZ"]
    # singled-out source Xk: synergy adds the pair atoms containing Xk and
    # the node joining them
    a["XY.XZ"] = single["X"].CI - a["XYZ"] - a["XY"] - a["XZ"]
    a["XY.YZ"] = single["Y"].CI - a["XYZ"] - a["XY"] - a["YZ"]
    a["XZ.YZ"] = single["Z"].CI - a["XYZ"] - a["XZ"] - a["YZ"]
    a["XY.XZ.YZ"] = v["CI"] - sum(a.values())
    # the singleton side of each single-source split is unique to it
    for k, pair in (("X", "YZ"), ("Y", "XZ"), ("Z", "XY")):
        a[k] = single[k].UI_B
        a[f"{k}.{pair}"] = v[f"UI{k}"] - a[k]
    a["X.Y"], a["X.Z"], a["Y.Z"] = v["UIXY"], v["UIXZ"], v["UIYZ"]
    a["X.Y.Z"] = v["SI"]
    return a


_EXPANSIONS = {
    "XYZ": (X, Y, Z), "XY": (X, Y), "XZ": (X, Z), "YZ": (Y, Z),
    "X": (X,), "Y": (Y,), "Z": (Z,),
}


def consistency_report(atoms: Mapping, dist: JointDistribution) -> dict:
    """Down-set sums minus the mutual informations they should equal.

    Returns one residual per expansion, keyed ``XYZ`` (total), ``XY``,
    ``XZ``, ``YZ`` (pairs) and ``X``, ``Y``, ``Z`` (single sources).
    """
    return {k: accumulate(atoms, k, 3) - mutual_information(dist, 0, srcs)
            for k, srcs in _EXPANSIONS.items()}
