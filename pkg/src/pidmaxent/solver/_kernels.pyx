# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels of the interior-point solver.

Same contracts as ``_kernels_py``; loops replace the reduceat/repeat passes so
that each call touches every variable a constant number of times.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp

cnp.import_array()

ctypedef cnp.int64_t idx_t


def objective(double[::1] q, idx_t[::1] cell_ptr, idx_t[::1] blk_ptr):
    """Value and gradient of ``sum_c q_c log(q_c / q_s)``."""
    cdef Py_ssize_t nb = blk_ptr.shape[0] - 1
    cdef Py_ssize_t s, c, v
    cdef double qs, qc, lc, f = 0.0
    cdef cnp.ndarray[double, ndim=1] grad_arr = np.empty(q.shape[0])
    cdef double[::1] grad = grad_arr
    cdef double[::1] cell_mass = np.empty(cell_ptr.shape[0] - 1)
    for s in range(nb):
        qs = 0.0
        for c in range(blk_ptr[s], blk_ptr[s + 1]):
            qc = 0.0
            for v in range(cell_ptr[c], cell_ptr[c + 1]):
                qc += q[v]
            cell_mass[c] = qc
            qs += qc
        for c in range(blk_ptr[s], blk_ptr[s + 1]):
            lc = log(cell_mass[c] / qs)
            f += cell_mass[c] * lc
            for v in range(cell_ptr[c], cell_ptr[c + 1]):
                grad[v] = lc
    return f, grad_arr


def hessian_inverse(double[::1] q, double t, double[::1] r, idx_t[::1] cell_ptr, idx_t[::1] blk_ptr):
    """Factors ``(r, alpha, g, kappa, coef)`` of ``(t * hess f + diag(1/r))^-1``."""
    cdef Py_ssize_t nc = cell_ptr.shape[0] - 1
    cdef Py_ssize_t nb = blk_ptr.shape[0] - 1
    cdef Py_ssize_t s, c, v, u
    cdef double qc, rc, tau, qs, den, ex
    alpha_arr = np.empty(nc)
    g_arr = np.empty(q.shape[0])
    kappa_arr = np.empty(nb)
    coef_arr = np.empty(q.shape[0])
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] g = g_arr
    cdef double[::1] kappa = kappa_arr
    cdef double[::1] coef = coef_arr
    for s in range(nb):
        qs = 0.0
        den = 0.0
        for c in range(blk_ptr[s], blk_ptr[s + 1]):
            qc = 0.0
            rc = 0.0
            for v in range(cell_ptr[c], cell_ptr[c + 1]):
                qc += q[v]
                rc += r[v]
            tau = t * rc / qc
            alpha[c] = (t / qc) / (1.0 + tau)
            for v in range(cell_ptr[c], cell_ptr[c + 1]):
                g[v] = r[v] / (1.0 + tau)
                # 1 - alpha r_v, summing the other members instead of subtracting
                ex = 0.0
                for u in range(cell_ptr[c], cell_ptr[c + 1]):
                    if u != v:
                        ex += r[u]
                coef[v] = (qc + t * ex) / (qc + t * rc)
            qs += qc
            den += qc / (1.0 + tau)
        kappa[s] = (t / qs) / (den / qs)
    return np.asarray(r), alpha_arr, g_arr, kappa_arr, coef_arr


def _apply2(double[::1] r, double[::1] alpha, double[::1] g, double[::1] kappa, double[::1] coef,
            double[:, ::1] X, idx_t[::1] cell_ptr, idx_t[::1] blk_ptr):
    cdef Py_ssize_t k = X.shape[1]
    cdef Py_ssize_t nb = blk_ptr.shape[0] - 1
    cdef Py_ssize_t s, c, v, u, j
    cdef double ex
    out_arr = np.empty((X.shape[0], k))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] gx = np.empty(k)
    for s in range(nb):
        for j in range(k):
            gx[j] = 0.0
        for c in range(blk_ptr[s], blk_ptr[s + 1]):
            for v in range(cell_ptr[c], cell_ptr[c + 1]):
                for j in range(k):
                    gx[j] += g[v] * X[v, j]
                    ex = 0.0
                    for u in range(cell_ptr[c], cell_ptr[c + 1]):
                        if u != v:
                            ex += r[u] * X[u, j]
                    out[v, j] = r[v] * (coef[v] * X[v, j] - alpha[c] * ex)
        for j in range(k):
            gx[j] *= kappa[s]
        for c in range(blk_ptr[s], blk_ptr[s + 1]):
            for v in range(cell_ptr[c], cell_ptr[c + 1]):
                for j in range(k):
                    out[v, j] += g[v] * gx[j]
    return out_arr


def apply_inverse(factors, X, idx_t[::1] cell_ptr, idx_t[::1] blk_ptr):
    """``M @ X`` for ``X`` of shape (n,) or (n, k)."""
    r, alpha, g, kappa, coef = factors
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        return _apply2(r, alpha, g, kappa, coef, np.ascontiguousarray(X[:, None]), cell_ptr, blk_ptr)[:, 0]
    return _apply2(r, alpha, g, kappa, coef, np.ascontiguousarray(X), cell_ptr, blk_ptr)


def block_lse_max(double[::1] z, idx_t[::1] cell_ptr, idx_t[::1] blk_ptr):
    """``max_s log sum_{c in s} exp(max_{v in c} z_v)``."""
    cdef Py_ssize_t nb = blk_ptr.shape[0] - 1
    cdef Py_ssize_t s, c, v
    cdef double u, um, acc, best = -np.inf
    cdef double[::1] cmax = np.empty(cell_ptr.shape[0] - 1)
    for s in range(nb):
        um = -np.inf
        for c in range(blk_ptr[s], blk_ptr[s + 1]):
            u = z[cell_ptr[c]]
            for v in range(cell_ptr[c] + 1, cell_ptr[c + 1]):
                if z[v] > u:
                    u = z[v]
            cmax[c] = u
            if u > um:
                um = u
        acc = 0.0
        for c in range(blk_ptr[s], blk_ptr[s + 1]):
            acc += exp(cmax[c] - um)
        if um + log(acc) > best:
            best = um + log(acc)
    return float(best)
