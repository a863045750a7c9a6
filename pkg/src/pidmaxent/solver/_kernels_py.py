"""Pure-numpy kernels of the interior-point solver; reference for ``_kernels.pyx``.

Variables are grouped into cells (``cell_ptr``) and cells into blocks
(``blk_ptr``). The objective is

    f(q) = sum_c q_c log(q_c / q_s),   q_c = sum of q over cell c,
                                       q_s = sum of q over block s,

and the Newton matrix ``t * hess f + diag(1 / r)`` has the inverse

    M = diag(r) - sum_c alpha_c h_c h_c^T + sum_s kappa_s g_s g_s^T

where ``h_c`` is ``r`` restricted to cell ``c`` and ``g_s``
is ``M_0 @ 1`` restricted to block ``s`` (``M_0`` the inverse without the
block term). All denominators are sums of positive terms, so the inverse
stays accurate when ``r`` spans many orders of magnitude.
"""
import numpy as np


def objective(q, cell_ptr, blk_ptr):
    """Value and gradient of ``f``; ``q`` must be strictly positive."""
    qc = np.add.reduceat(q, cell_ptr[:-1])
    qs = np.add.reduceat(qc, blk_ptr[:-1])
    lc = np.log(qc / np.repeat(qs, np.diff(blk_ptr)))
    return float(np.dot(qc, lc)), np.repeat(lc, np.diff(cell_ptr))


def _exclusive(vals, cell_ptr):
    """Per variable, the sum of ``vals`` over the *other* members of its cell.

    Built from prefix and suffix sums so nothing is subtracted: the result
    keeps full relative accuracy when one member dominates its cell.
    """
    csz = np.diff(cell_ptr)
    if csz.max() == 1:
        return np.zeros_like(vals)
    cell = np.repeat(np.arange(len(csz)), csz)
    pos = np.arange(len(cell)) - np.repeat(cell_ptr[:-1], csz)
    P = np.zeros((len(csz), int(csz.max())) + vals.shape[1:])
    P[cell, pos] = vals
    left = np.zeros_like(P)
    left[:, 1:] = np.cumsum(P, axis=1)[:, :-1]
    right = np.zeros_like(P)
    right[:, :-1] = np.cumsum(P[:, ::-1], axis=1)[:, ::-1][:, 1:]
    return (left + right)[cell, pos]


def hessian_inverse(q, t, r, cell_ptr, blk_ptr):
    """Factors of ``(t * hess f + diag(1/r))^-1``.

    Returns ``(r, alpha, g, kappa, coef)`` where ``coef = 1 - alpha_c r`` is
    formed without cancellation (it tends to zero as ``t r >> q``).
    """
    csz = np.diff(cell_ptr)
    qc = np.add.reduceat(q, cell_ptr[:-1])
    qs = np.add.reduceat(qc, blk_ptr[:-1])
    rc = np.add.reduceat(r, cell_ptr[:-1])          # D_c = sum of r over the cell
    tau = t * rc / qc
    alpha = (t / qc) / (1.0 + tau)
    coef = (np.repeat(qc, csz) + t * _exclusive(r, cell_ptr)) / np.repeat(qc + t * rc, csz)
    # M_0 @ 1 on cell c is r / (1 + tau_c)
    g = r / np.repeat(1.0 + tau, csz)
    # 1 - (t/q_s) 1^T g  =  sum_c (q_c/q_s) / (1 + tau_c)
    den = np.add.reduceat(qc / (1.0 + tau), blk_ptr[:-1]) / qs
    kappa = (t / qs) / den
    return r, alpha, g, kappa, coef


def apply_inverse(factors, X, cell_ptr, blk_ptr):
    """``M @ X`` for ``X`` of shape (n,) or (n, k)."""
    r, alpha, g, kappa, coef = factors
    csz = np.diff(cell_ptr)
    bsz = np.diff(blk_ptr)
    vec = X.ndim == 1
    if vec:
        X = X[:, None]
    # r * (x - alpha * sum_cell(r x)), split into own term and the others
    ex = _exclusive(r[:, None] * X, cell_ptr)
    out = r[:, None] * (coef[:, None] * X - np.repeat(alpha, csz)[:, None] * ex)
    gx = np.add.reduceat(g[:, None] * X, cell_ptr[:-1], axis=0)
    gx = np.add.reduceat(gx, blk_ptr[:-1], axis=0)
    out += g[:, None] * np.repeat(np.repeat(kappa[:, None] * gx, bsz, axis=0), csz, axis=0)
    return out[:, 0] if vec else out


def block_lse_max(z, cell_ptr, blk_ptr):
    """``max_s log sum_{c in s} exp(max_{v in c} z_v)``."""
    u = np.maximum.reduceat(z, cell_ptr[:-1])
    um = np.maximum.reduceat(u, blk_ptr[:-1])
    lse = um + np.log(np.add.reduceat(np.exp(u - np.repeat(um, np.diff(blk_ptr))), blk_ptr[:-1]))
    return float(lse.max())
