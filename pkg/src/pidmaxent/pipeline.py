"""Trivariate maximum-entropy PID from four constrained minimizations.

All four programs minimize mutual information over the polytope of joint
distributions that share every (target, source) marginal with the input:

========  ======================  ===============
key       objective               feeds
========  ======================  ===============
``I``     MI(T; X, Y, Z)          CI, UIX/UIY/UIZ
``12``    MI(T; X, Y)             UIZ
``13``    MI(T; X, Z)             UIY
``23``    MI(T; Y, Z)             UIX
========  ======================  ===============

The shared term and the three redundant-unique terms then follow from the
four sum identities (total and per source).
"""
from __future__ import annotations

import math
import time
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .distributions import JointDistribution, MarginalSpec, from_pairs
from .errors import ArityMismatch, BadLevel, SingularSystem, SolverFailed
from .info import mutual_information
from .solver import FAILED, Tolerances, build_program, solve, violations

__all__ = [
    "KEYS",
    "ERR_KEYS",
    "PROBLEMS",
    "PidResult",
    "pid",
    "qp_repair",
    "identity_matrix",
    "identity_residuals",
    "run_modes",
]

KEYS = ("CI", "UIX", "UIY", "UIZ", "UIXY", "UIXZ", "UIYZ", "SI")
ERR_KEYS = ("Num_Err_I", "Num_Err_12", "Num_Err_13", "Num_Err_23")
PROBLEMS = {"I": (1, 2, 3), "12": (1, 2), "13": (1, 3), "23": (2, 3)}
_LABEL = {"I": "MI(T;X,Y,Z)", "12": "MI(T;X,Y)", "13": "MI(T;X,Z)", "23": "MI(T;Y,Z)"}

TEMPLATE = """Synergistic information: {CI}
Unique information in X: {UIX}
Unique information in Y: {UIY}
Unique information in Z: {UIZ}
Unique information in X,Y: {UIXY}
Unique information in X,Z: {UIXZ}
Unique information in Y,Z: {UIYZ}
Shared information: {SI}"""

# rows: total, X, Y, Z; columns follow KEYS
_C = np.array([
    [1, 1, 1, 1, 1, 1, 1, 1],
    [0, 1, 0, 0, 1, 1, 0, 1],
    [0, 0, 1, 0, 1, 0, 1, 1],
    [0, 0, 0, 1, 0, 1, 1, 1],
], dtype=float)


def identity_matrix() -> np.ndarray:
    """4 x 8 matrix of the sum identities (rows: total, X, Y, Z; columns: KEYS)."""
    return _C.copy()


def _mi_vector(mi_constants) -> np.ndarray:
    """(MI(T;X,Y,Z), MI(T;X), MI(T;Y), MI(T;Z)) from a mapping or a sequence."""
    if isinstance(mi_constants, Mapping):
        return np.array([mi_constants[k] for k in ("XYZ", "X", "Y", "Z")], dtype=float)
    v = np.asarray(mi_constants, dtype=float)
    if v.shape != (4,):
        raise ValueError("mi_constants needs four values: MI(T;X,Y,Z), MI(T;X), MI(T;Y), MI(T;Z)")
    return v


def _eight(values) -> np.ndarray:
    if isinstance(values, Mapping):
        return np.array([values[k] for k in KEYS], dtype=float)
    v = np.asarray(values, dtype=float)
    if v.shape != (8,):
        raise ValueError(f"expected eight values ordered as {KEYS}")
    return v


def identity_residuals(values, mi_constants) -> np.ndarray:
    """Left minus right side of the four sum identities."""
    return _C @ _eight(values) - _mi_vector(mi_constants)


def qp_repair(raw, mi_constants) -> dict:
    """Closest eight-vector (Euclidean) that satisfies the four sum identities.

    Solves the equality-constrained least-squares KKT system
    ``[[I, C^T], [C, 0]] [u; lam] = [raw; d]`` directly.

    Parameters
    ----------
    raw : mapping or sequence
        The eight components, keyed or ordered as :data:`KEYS`. Extra keys
        (such as the optimal values) are ignored.
    mi_constants : mapping or sequence
        ``XYZ, X, Y, Z`` mutual informations, either keyed by those names or
        as a sequence in that order.
    """
    u0 = _eight(raw)
    d = _mi_vector(mi_constants)
    K = np.zeros((12, 12))
    K[:8, :8] = np.eye(8)
    K[:8, 8:] = _C.T
    K[8:, :8] = _C
    rhs = np.r_[u0, d]
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:  # C has full row rank; unreachable
        raise SingularSystem("identity KKT system is singular") from exc
    u = sol[:8]
    # one refinement pass keeps the identity residual at rounding level
    u -= _C.T @ np.linalg.solve(_C @ _C.T, _C @ u - d)
    return dict(zip(KEYS, u.tolist()))


class PidResult(Mapping):
    """Decomposition values plus diagnostics; indexable like the result dictionary.

    Keys are the eight components of :data:`KEYS` and the four violation
    triples of :data:`ERR_KEYS`; the eight alone are in ``components``. Solve reports, timings, the four optimal
    values (``optima``) and the mutual-information constants (``mi``) are
    kept as attributes.
    """

    def __init__(self, values, num_err, *, repaired, reports, optima, mi, timings):
        self.components = dict(values)
        self.num_err = dict(num_err)
        self.repaired = bool(repaired)
        self.reports = reports
        self.optima = optima
        self.mi = mi
        self.timings = timings

    def __getitem__(self, key):
        if key in self.components:
            return self.components[key]
        return self.num_err[key]

    def __iter__(self):
        yield from KEYS
        yield from ERR_KEYS

    def __len__(self):
        return len(KEYS) + len(ERR_KEYS)

    @property
    def statuses(self) -> dict:
        return {k: r.status for k, r in self.reports.items()}

    def as_dict(self) -> dict:
        """Plain dictionary of the twelve keys (violation triples as lists)."""
        out = {k: self.components[k] for k in KEYS}
        out.update({k: list(self.num_err[k]) for k in ERR_KEYS})
        return out

    def residuals(self) -> np.ndarray:
        return identity_residuals(self.components, self.mi)

    def __repr__(self):
        body = ", ".join(f"{k}={self.components[k]:.6g}" for k in KEYS)
        return f"PidResult({body}, repaired={self.repaired})"


def _as_distribution(dist) -> JointDistribution:
    if isinstance(dist, JointDistribution):
        return dist
    if isinstance(dist, Mapping):
        return from_pairs(dist)
    raise TypeError(f"expected a JointDistribution or a mapping, got {type(dist).__name__}")


def _parallel_flag(parallel) -> bool:
    if isinstance(parallel, str):
        if parallel.lower() not in ("on", "off"):
            raise ValueError(f"parallel must be 'on' or 'off', got {parallel!r}")
        return parallel.lower() == "on"
    return bool(parallel)


def pid(dist, tol: Tolerances | None = None, parallel=False, **tol_overrides) -> PidResult:
    """Trivariate PID of ``dist`` (target first, then X, Y, Z).

    Parameters
    ----------
    dist : JointDistribution or mapping
        A mapping ``{(t, x, y, z): p}`` is accepted and normalized.
    tol : Tolerances, optional
    parallel : bool or {'on', 'off'}
        Build, solve and post-process the four programs concurrently, one
        phase after the other. Values are identical to the serial run.
    **tol_overrides
        Individual tolerance names (``abstol=1e-12``, ``max_iters=200``, ...).

    Raises
    ------
    ArityMismatch
        ``dist`` does not have exactly three sources.
    SolverFailed
        A program failed and the repaired values are unusable.
    """
    dist = _as_distribution(dist)
    if dist.arity != 3:
        raise ArityMismatch(f"pid needs three sources, got {dist.arity}")
    tol = (tol or Tolerances()).updated(**tol_overrides)
    par = _parallel_flag(parallel)
    timings: dict = {"steps": {}}

    spec = MarginalSpec.pairwise(dist)
    keys = list(PROBLEMS)

    def build(k):
        t0 = time.perf_counter()
        prog = build_program(dist, spec, PROBLEMS[k])
        timings["steps"][f"build {k}"] = time.perf_counter() - t0
        return prog

    def run(k, prog):
        t0 = time.perf_counter()
        rep = solve(prog, tol)
        timings["steps"][f"solve {k}"] = time.perf_counter() - t0
        return rep

    def post(k, rep):
        t0 = time.perf_counter()
        out = (rep.optimal_value, violations(rep, tol))
        timings["steps"][f"violations {k}"] = time.perf_counter() - t0
        return out

    t0 = time.perf_counter()
    if par:
        with ThreadPoolExecutor(max_workers=len(keys)) as pool:
            progs = dict(zip(keys, pool.map(build, keys)))
            t1 = time.perf_counter()
            reports = dict(zip(keys, pool.map(lambda k: run(k, progs[k]), keys)))
            t2 = time.perf_counter()
            posts = dict(zip(keys, pool.map(lambda k: post(k, reports[k]), keys)))
    else:
        progs = {k: build(k) for k in keys}
        t1 = time.perf_counter()
        reports = {k: run(k, progs[k]) for k in keys}
        t2 = time.perf_counter()
        posts = {k: post(k, reports[k]) for k in keys}
    t3 = time.perf_counter()

    optima = {k: posts[k][0] for k in keys}
    num_err = {f"Num_Err_{k}": posts[k][1] for k in keys}
    mi = {
        "XYZ": mutual_information(dist, 0, (1, 2, 3)),
        "X": mutual_information(dist, 0, (1,)),
        "Y": mutual_information(dist, 0, (2,)),
        "Z": mutual_information(dist, 0, (3,)),
    }

    m = optima["I"]
    ci = mi["XYZ"] - m
    uix, uiy, uiz = m - optima["23"], m - optima["13"], m - optima["12"]
    r1, r2, r3 = mi["X"] - uix, mi["Y"] - uiy, mi["Z"] - uiz
    rt = mi["XYZ"] - ci - uix - uiy - uiz
    values = {
        "CI": ci, "UIX": uix, "UIY": uiy, "UIZ": uiz,
        "UIXY": rt - r3, "UIXZ": rt - r2, "UIYZ": rt - r1,
        "SI": r1 + r2 + r3 - 2.0 * rt,
    }

    # a Failed status means some violation exceeds its relaxed tolerance
    failed = [k for k in keys if reports[k].status == FAILED]
    repaired = False
    if failed:
        values = qp_repair(values, mi)
        repaired = True
        res = identity_residuals(values, mi)
        if not all(math.isfinite(v) for v in values.values()) or np.max(np.abs(res)) > 1e-10:
            raise SolverFailed("repair could not recover values after failed solves of "
                               + ", ".join(_LABEL[k] for k in failed))
    t4 = time.perf_counter()
    timings.update(build=t1 - t0, solve=t2 - t1, violations=t3 - t2, results=t4 - t3, total=t4 - t0)

    return PidResult(values, num_err, repaired=repaired, reports=reports,
                     optima=optima, mi=mi, timings=timings)


def _fmt_stats(rep) -> str:
    s = rep.stats()
    return ("{" + ", ".join(f"'{k}': {v!r}" for k, v in s.items()) + "}")


def run_modes(result: PidResult, output_level: int = 0) -> str:
    """Render ``result`` at a printing level.

    0 gives the eight values; 1 adds stage timings and brief solver stats per
    program; 2 adds per-step timings; 3 adds each program's iteration table.

    Raises
    ------
    BadLevel
        ``output_level`` outside 0..3.
    """
    if isinstance(output_level, bool) or output_level not in (0, 1, 2, 3):
        raise BadLevel(f"output level must be 0, 1, 2 or 3, got {output_level!r}")
    lines = [TEMPLATE.format(**result.components)]
    if output_level == 0:
        return lines[0]
    tm = result.timings
    lines.append("")
    lines.append(f"Time to build the four programs: {tm['build']:.6f} s")
    lines.append(f"Time to solve the four programs: {tm['solve']:.6f} s")
    for k in PROBLEMS:
        lines.append(f"Stats for minimizing {_LABEL[k]}:")
        lines.append(_fmt_stats(result.reports[k]))
    lines.append(f"Time to compute optimality violations: {tm['violations']:.6f} s")
    lines.append(f"Time to obtain the results: {tm['results']:.6f} s")
    if result.repaired:
        lines.append("Values repaired to satisfy the sum identities")
    if output_level >= 2:
        lines.append("Per-step timings:")
        for name in sorted(tm["steps"]):
            lines.append(f"  {name}: {tm['steps'][name]:.6f} s")
    if output_level == 3:
        for k in PROBLEMS:
            rep = result.reports[k]
            lines.append(f"Iterations for minimizing {_LABEL[k]} ({rep.program.describe()}):")
            lines.append(f"{'It':>3} {'pcost':>12} {'dcost':>12} {'gap':>9} {'pres':>9} {'dres':>9} {'mu':>9}")
            if not rep.trace:
                lines.append(f"  closed form: {rep.program.fixed_reason}")
            for row in rep.trace:
                lines.append(f"{row['iter']:>3} {row['pcost']:>+12.5e} {row['dcost']:>+12.5e} "
                             f"{row['gap']:>9.1e} {row['pres']:>9.1e} {row['dres']:>9.1e} {row['mu']:>9.1e}")
    return "\n".join(lines)
