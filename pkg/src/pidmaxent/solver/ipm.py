"""Primal-dual interior-point method for :class:`ConeProgram`.

Solves ``min f(q)`` subject to ``A q = b`` and ``q >= 0`` with
Mehrotra predictor-corrector steps on the perturbed optimality conditions

    grad f(q) - lam + A^T nu = 0,   A q = b,   q * lam = sigma * mu,

falling back to a primal log-barrier method when those steps stall.

Each iterate carries the certificate triple reported by the solver:
``pres = |A q - b|_inf``; ``dres``, the shift along the unit-mass direction
that makes ``nu`` dual feasible (every block log-sum-exp of ``-A^T nu`` at
most zero); and the gap between ``pcost = f(q)`` and the resulting rigorous
lower bound ``dcost``. Blocks whose mass vanishes at the optimum make the
gradient of ``f`` meaningless there, which is why stationarity of ``f`` is
not used as the dual residual.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np
import scipy.linalg

from ..errors import BadTolerance
from . import kernels
from .program import ConeProgram

__all__ = ["Tolerances", "SolveReport", "solve", "violations", "OPTIMAL", "INACCURATE", "FAILED"]

OPTIMAL, INACCURATE, FAILED = "Optimal", "Inaccurate", "Failed"

# The iteration stops well inside the requested tolerances so that values
# derived from differences of optima keep the requested accuracy.
GAP_MARGIN = 1e-3
PRES_MARGIN = 1e-2



@dataclass(frozen=True)
class Tolerances:
    """Stopping tolerances; the relaxed ``*_inacc`` ones decide Inaccurate.

    Raises
    ------
    BadTolerance
        Non-positive values, strict tolerance above its relaxed partner, or a
        non-positive iteration cap.
    """

    feastol: float = 1e-7
    abstol: float = 1e-6
    reltol: float = 1e-6
    feastol_inacc: float = 1e-3
    abstol_inacc: float = 1e-4
    reltol_inacc: float = 1e-4
    max_iter: int = 100

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "max_iter":
                if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                    raise BadTolerance(f"max_iter must be a positive integer, got {v!r}")
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise BadTolerance(f"{f.name} must be a positive number, got {v!r}")
        for name in ("feastol", "abstol", "reltol"):
            if getattr(self, name) > getattr(self, name + "_inacc"):
                raise BadTolerance(f"{name} exceeds {name}_inacc")

    def updated(self, **overrides) -> "Tolerances":
        """Copy with overrides; ``None`` values are ignored, ``max_iters`` accepted."""
        if "max_iters" in overrides:
            overrides["max_iter"] = overrides.pop("max_iters")
        known = {f.name for f in fields(self)}
        bad = set(overrides) - known
        if bad:
            raise BadTolerance(f"unknown tolerance {sorted(bad)[0]!r}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(eq=False)
class SolveReport:
    """Outcome of one :func:`solve`.

    ``pcost`` and ``dcost`` are in nats of ``-H(T | S)``; ``optimal_value`` is
    the minimum mutual information in bits, taken from the primal point.
    """

    status: str
    optimal_value: float
    pcost: float
    dcost: float
    primal_residual: float
    dual_residual: float
    duality_gap: float
    iterations: int
    q: np.ndarray
    program: ConeProgram
    trace: list = field(default_factory=list)
    seconds: float = 0.0
    _optimizer: object = None

    @property
    def pres(self):
        return self.primal_residual

    @property
    def dres(self):
        return self.dual_residual

    @property
    def gap(self):
        return self.duality_gap

    @property
    def optimizer(self):
        """Minimizing joint distribution over all variables."""
        if self._optimizer is None:
            self._optimizer = self.program.extend(self.q)
        return self._optimizer

    def stats(self) -> dict:
        return {"pcost": self.pcost, "dcost": self.dcost, "pres": self.primal_residual,
                "dres": self.dual_residual, "gap": self.duality_gap,
                "iter": self.iterations, "exitFlag": self.status, "time": self.seconds}


def violations(report: SolveReport, tol: Tolerances | None = None) -> tuple[float, float, float]:
    """(primal residual, dual residual, duality gap) of a finished solve."""
    return (float(report.primal_residual), float(report.dual_residual), float(report.duality_gap))


def classify(pres, dres, gap, pcost, tol: Tolerances) -> str:
    if (pres <= tol.feastol and dres <= tol.feastol
            and gap <= max(tol.abstol, tol.reltol * abs(pcost))):
        return OPTIMAL
    if (pres <= tol.feastol_inacc and dres <= tol.feastol_inacc
            and gap <= max(tol.abstol_inacc, tol.reltol_inacc * abs(pcost))):
        return INACCURATE
    return FAILED


def _start_point(prog: ConeProgram, sweeps: int = 2000, tol: float = 1e-13) -> np.ndarray:
    """Independent coupling of the pinned tables, then fitted to every table.

    The coupling is strictly positive on the support and already feasible
    when the pinned groups overlap only in the target. Otherwise iterative
    proportional fitting moves it to the closest (in relative entropy)
    distribution matching all tables, which stays strictly positive.
    """
    A, b = prog.A_full, prog.b_full
    q = np.ones(len(prog.support))
    for sl in prog.row_groups:
        q *= A[sl].T @ b[sl]
    k = len(prog.row_groups)
    if k > 1:
        q /= prog.target_marginal[prog.support[:, 0]] ** (k - 1)
    q = np.clip(q, 1e-300, None)
    q /= q.sum()
    if k > 1:
        for _ in range(sweeps):
            if np.max(np.abs(A @ q - b)) <= tol:
                break
            for sl in prog.row_groups:
                m = A[sl] @ q
                ratio = np.divide(b[sl], m, out=np.zeros_like(m), where=m > 0)
                q *= A[sl].T @ ratio
        q = np.clip(q, 1e-300, None)
    return q


_ARMIJO = 1e-4
_MIN_STEP = 1e-10
# primal-dual iterations without halving the residuals before giving up
_STALL = 12
# barrier schedule of the fallback method
MU_START = 1e-1
MU_DECREASE = 0.1
CENTERED = 1e-1
# reduced solve must meet every constraint row to this fraction of its mass
_ROW_REL = 1e-6
# largest n + m for the dense fallback system
_DENSE_LIMIT = 3000


def _merit(q, lam, nu, rd, rp, target):
    return float(rd @ rd + rp @ rp + np.sum((q * lam - target) ** 2))


def _reduced_kkt(q, lam, A, At, cell_ptr, blk_ptr):
    """Solver for the Newton system through the ``A M A^T`` Schur complement.

    ``M = (hess f + diag(lam/q))^-1`` is applied with the structured kernels,
    so the cost is linear in the number of variables per constraint row.
    """
    fac = kernels.hessian_inverse(q, 1.0, q / lam, cell_ptr, blk_ptr)
    MAt = kernels.apply_inverse(fac, At, cell_ptr, blk_ptr)
    S = A @ MAt
    try:
        cf = scipy.linalg.cho_factor(S, check_finite=False)
        solve_s = lambda v: scipy.linalg.cho_solve(cf, v, check_finite=False)
    except np.linalg.LinAlgError:
        solve_s = lambda v: np.linalg.lstsq(S, v, rcond=None)[0]

    def solve(r1, r2):
        # (hess f + diag(lam/q)) dq + A^T dnu = r1,  A dq = r2
        Mr = kernels.apply_inverse(fac, r1, cell_ptr, blk_ptr)
        dnu = solve_s(A @ Mr - r2)
        return Mr - MAt @ dnu, dnu
    return solve


def _scaled_kkt(q, lam, A, cell_ptr, blk_ptr):
    """Factor the full Newton system with variables scaled by ``sqrt(q)``.

    In these units the Hessian block is ``Q^1/2 hess f Q^1/2 + diag(lam)``,
    whose entries are bounded regardless of how many decades the masses span,
    and each constraint row is scaled to unit norm. Dense, so only used when
    the reduced system has lost the small rows.
    """
    n, m = len(q), A.shape[0]
    csz, bsz = np.diff(cell_ptr), np.diff(blk_ptr)
    cell = np.repeat(np.arange(len(csz)), csz)
    blk = np.repeat(np.repeat(np.arange(len(bsz)), bsz), csz)
    qc = np.add.reduceat(q, cell_ptr[:-1])
    qs = np.add.reduceat(qc, blk_ptr[:-1])
    s = np.sqrt(q)
    K11 = ((cell[:, None] == cell[None, :]) / qc[cell][:, None]
           - (blk[:, None] == blk[None, :]) / qs[blk][:, None]) * np.outer(s, s)
    K11[np.diag_indices(n)] += lam
    As = A * s
    w = 1.0 / np.maximum(np.linalg.norm(As, axis=1), 1e-300)
    As *= w[:, None]
    K = np.block([[K11, As.T], [As, np.zeros((m, m))]])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            lu = scipy.linalg.lu_factor(K, check_finite=False)
        solve_k = lambda v: scipy.linalg.lu_solve(lu, v, check_finite=False)
    except scipy.linalg.LinAlgWarning:
        # multipliers below the rounding of the Hessian leave K singular
        solve_k = lambda v: np.linalg.lstsq(K, v, rcond=None)[0]

    def solve(r1, r2):
        z = solve_k(np.concatenate([s * r1, w * r2]))
        return s * z[:n], w * z[n:]
    return solve


def _max_step(x, dx):
    neg = dx < 0
    return float(np.min(-x[neg] / dx[neg])) if neg.any() else np.inf


class _Method:
    """Iterate state shared by both step rules: multipliers and solver choice."""

    def __init__(self, prog: ConeProgram, q: np.ndarray):
        self.prog = prog
        self.A, self.b = prog.A, prog.b
        self.At = np.ascontiguousarray(self.A.T)
        self.cp, self.bp = prog.cell_ptr, prog.blk_ptr
        self.n = len(q)
        self.nu = np.zeros(self.A.shape[0])
        self.dense = False

    def _kkt(self, q, lam, r1, r2):
        """Newton-system solver, switching for good to the scaled dense one.

        The reduced system loses rows of tiny mass once its condition number
        passes 1e16. The probe right-hand side is checked against every
        original row, since dropped rows can pin tiny entries too.
        """
        prog = self.prog
        small = self.n + self.A.shape[0] <= _DENSE_LIMIT
        if not self.dense:
            kkt = _reduced_kkt(q, lam, self.A, self.At, self.cp, self.bp)
            if not small:
                return kkt
            dq, _ = kkt(r1, r2)
            miss = np.abs(prog.A_full @ (q + dq) - prog.b_full)
            self.dense = bool(np.any(miss > _ROW_REL * np.abs(prog.b_full)))
            if not self.dense:
                return kkt
        return _scaled_kkt(q, lam, self.A, self.cp, self.bp)


class _PrimalDual(_Method):
    """Mehrotra predictor-corrector steps, backtracked on the KKT residual."""

    def __init__(self, prog, q):
        super().__init__(prog, q)
        self._q = q
        self.lam = np.full(self.n, 1.0 / self.n) / np.maximum(q, 1e-3 / self.n)

    @property
    def mu(self):
        return float(self._q @ self.lam) / self.n

    def step(self, q, gf, rp):
        A, At, b, lam, nu = self.A, self.At, self.b, self.lam, self.nu
        rd = gf - lam + At @ nu
        mu = float(q @ lam) / self.n
        kkt = self._kkt(q, lam, -rd - lam, -rp)

        def newton(rc):
            dq, dnu = kkt(-rd - rc / q, -rp)
            return dq, -(rc + lam * dq) / q, dnu

        dq, dl, _ = newton(q * lam)
        a_aff = min(1.0, _max_step(q, dq), _max_step(lam, dl))
        mu_aff = float((q + a_aff * dq) @ (lam + a_aff * dl)) / self.n
        target = min(1.0, (mu_aff / mu) ** 3) * mu
        m0 = _merit(q, lam, nu, rd, rp, target)
        qn = None
        for rc in (q * lam + dq * dl - target, q * lam - target):
            dq, dl, dnu = newton(rc)
            a = min(1.0, 0.99 * _max_step(q, dq), 0.99 * _max_step(lam, dl))
            while a > _MIN_STEP:
                qn, ln, nn = q + a * dq, lam + a * dl, nu + a * dnu
                _, gn = kernels.objective(qn, self.cp, self.bp)
                if _merit(qn, ln, nn, gn - ln + At @ nn, A @ qn - b, target) <= (1 - _ARMIJO * a) * m0:
                    break
                a *= 0.5
            else:
                continue
            break
        if qn is None:
            return None  # no admissible step at all: stalled on the boundary
        self.lam, self.nu, self._q = ln, nn, qn
        return qn


class _Barrier(_Method):
    """Damped Newton steps on ``f - mu sum(log q)`` over ``A q = b``.

    Slower than the primal-dual rule but more tolerant of masses spanning
    many decades, where the complementarity products lose all precision.
    """

    def __init__(self, prog, q):
        super().__init__(prog, q)
        self.mu = MU_START / self.n

    def step(self, q, gf, rp):
        mu, cp, bp = self.mu, self.cp, self.bp
        lam = mu / q
        gb = gf - lam
        dq, nu = self._kkt(q, lam, -gb, -rp)(-gb, -rp)
        decrement = float(dq @ (-gb - self.At @ nu))
        f, _ = kernels.objective(q, cp, bp)
        phi = f - mu * float(np.sum(np.log(q)))
        slope = float(gb @ dq)
        # late in the solve the decrease drops below the rounding of f itself
        noise = 64 * np.finfo(float).eps * (abs(f) + mu * float(np.sum(np.abs(np.log(q)))))
        a = min(1.0, 0.99 * _max_step(q, dq))
        step = None
        while a > _MIN_STEP:
            qn = q + a * dq
            fn, _ = kernels.objective(qn, cp, bp)
            if fn - mu * float(np.sum(np.log(qn))) <= phi + _ARMIJO * a * min(slope, 0.0) + noise:
                step = qn
                break
            a *= 0.5
        self.nu = nu
        if step is None or decrement <= CENTERED * self.n * mu or decrement <= 1e-30:
            self.mu *= MU_DECREASE
        return q if step is None else step


_RANK = {OPTIMAL: 0, INACCURATE: 1, FAILED: 2}


def _iterate(prog, tol, method_cls, trace, stall=None):
    """Run one step rule to the stopping test; returns the best iterate seen.

    With ``stall`` set, give up once that many iterations pass without
    halving the best residual sum.
    """
    cp, bp = prog.cell_ptr, prog.blk_ptr
    q = _start_point(prog)
    method = method_cls(prog, q)
    rows = []
    best = None
    progress = []
    it = 0
    while True:
        f, gf = kernels.objective(q, cp, bp)
        rp = method.A @ q - method.b
        nu = method.nu

        # certificate: the multipliers shifted along the unit-mass direction
        # are dual feasible, giving a rigorous lower bound; the size of that
        # shift is the dual residual
        shift = kernels.block_lse_max(-(method.At @ nu), cp, bp)
        dcost = float(-method.b @ nu) - shift
        pcost = f
        pres = float(np.max(np.abs(prog.A_full @ q - prog.b_full)))
        dres = abs(shift)
        gap = abs(pcost - dcost)
        if trace:
            rows.append({"iter": it, "pcost": pcost, "dcost": dcost, "gap": gap,
                         "pres": pres, "dres": dres, "mu": method.mu})
        cls = classify(pres, dres, gap, pcost, tol)
        score = (_RANK[cls], max(pres, dres) + gap)
        target = GAP_MARGIN * max(tol.abstol, tol.reltol * abs(pcost))
        done = pres <= PRES_MARGIN * tol.feastol and dres <= PRES_MARGIN * tol.feastol and gap <= target
        if done:
            cls = OPTIMAL
        if done or best is None or score <= best["score"]:
            best = {"score": score, "status": cls, "q": q.copy(), "pcost": pcost,
                    "dcost": dcost, "pres": pres, "dres": dres, "gap": gap}
        progress.append(best["score"][1])
        if done or it >= tol.max_iter:
            break
        if stall and it >= stall and progress[-1] > 0.5 * progress[-1 - stall]:
            break
        q = method.step(q, gf, rp)
        it += 1
        if q is None:
            break
    best.update(iterations=it, trace=rows, done=done)
    return best


def solve(program: ConeProgram, tol: Tolerances | None = None, *, trace: bool = True) -> SolveReport:
    """Minimize ``MI(T; S)`` over the program's polytope.

    Primal-dual steps come first; a run that stalls or ends short of the
    stopping test is repeated with the log-barrier rule and the better of
    the two is kept.

    Parameters
    ----------
    program : ConeProgram
    tol : Tolerances, optional
        Defaults to :class:`Tolerances` ().
    trace : bool
        Keep one row of diagnostics per iteration.

    Returns
    -------
    SolveReport
        Status ``Failed`` still carries the best iterate and its residuals.
    """
    tol = tol or Tolerances()
    t_start = time.perf_counter()
    prog = program
    if prog.is_fixed:
        q = prog.reference
        pres = float(np.max(np.abs(prog.A_full @ q - prog.b_full)))
        f = prog.fixed_value * math.log(2) - prog.h_target
        return SolveReport(status=classify(pres, 0.0, 0.0, f, tol), optimal_value=prog.fixed_value,
                           pcost=f, dcost=f, primal_residual=pres, dual_residual=0.0,
                           duality_gap=0.0, iterations=0, q=q, program=prog,
                           trace=[], seconds=time.perf_counter() - t_start)

    best = _iterate(prog, tol, _PrimalDual, trace, stall=_STALL)
    if not best["done"]:
        other = _iterate(prog, tol, _Barrier, trace)
        if (not other["done"], other["score"]) < (not best["done"], best["score"]):
            best = other
    return SolveReport(status=best["status"], optimal_value=prog.value_bits(best["pcost"]),
                       pcost=best["pcost"], dcost=best["dcost"], primal_residual=best["pres"],
                       dual_residual=best["dres"], duality_gap=best["gap"],
                       iterations=best["iterations"], q=best["q"], program=prog,
                       trace=best["trace"], seconds=time.perf_counter() - t_start)
