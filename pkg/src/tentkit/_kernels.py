"""Compiled per-patch DG kernels for scalar flux models.

Coefficient arrays have shape ``(n_elements, p + 1)`` in the Legendre basis.
Facet kinds: 0 interior (normal +x), 1 left domain boundary, 2 right domain
boundary, -1 no facet with nonzero pole height.
"""

from __future__ import annotations

import functools

import numpy as np
from numba import njit

OK, NOT_CONVERGED, SINGULAR = 0, 1, 2


@njit(cache=True)
def _small_solve(J, r):
    """Gaussian elimination with partial pivoting; returns (x, ok)."""
    n = r.size
    A = J.copy()
    x = r.copy()
    for col in range(n):
        piv = col
        big = abs(A[col, col])
        for row in range(col + 1, n):
            if abs(A[row, col]) > big:
                big = abs(A[row, col])
                piv = row
        if big == 0.0:
            return x, False
        if piv != col:
            for k in range(n):
                tmp = A[col, k]
                A[col, k] = A[piv, k]
                A[piv, k] = tmp
            tmp = x[col]
            x[col] = x[piv]
            x[piv] = tmp
        for row in range(col + 1, n):
            fac = A[row, col] / A[col, col]
            if fac != 0.0:
                for k in range(col, n):
                    A[row, k] -= fac * A[col, k]
                x[row] -= fac * x[col]
    for row in range(n - 1, -1, -1):
        acc = x[row]
        for k in range(row + 1, n):
            acc -= A[row, k] * x[k]
        x[row] = acc / A[row, row]
    return x, True


@functools.lru_cache(maxsize=None)
def build_kernels(g, dg, f, df, fn):
    """Specialise the patch kernels to one set of flux ufuncs."""

    @njit(cache=False)
    def apply_M(U, hs, slope, V, w, prm):
        ne, P = U.shape
        nq = w.size
        out = np.zeros((ne, P))
        for e in range(ne):
            jac = 0.5 * hs[e]
            for q in range(nq):
                u = 0.0
                for k in range(P):
                    u += U[e, k] * V[q, k]
                val = (g(u, prm) - f(u, prm) * slope[e]) * w[q] * jac
                for k in range(P):
                    out[e, k] += val * V[q, k]
        return out

    @njit(cache=False)
    def apply_M1(U, hs, ddelta, V, w, prm):
        ne, P = U.shape
        nq = w.size
        out = np.zeros((ne, P))
        for e in range(ne):
            jac = 0.5 * hs[e] * ddelta[e]
            for q in range(nq):
                u = 0.0
                for k in range(P):
                    u += U[e, k] * V[q, k]
                val = f(u, prm) * w[q] * jac
                for k in range(P):
                    out[e, k] += val * V[q, k]
        return out

    @njit(cache=False)
    def apply_A(U, dq, V, D, w, kind, eL, eR, fdelta, alpha, beta, prm):
        ne, P = U.shape
        nq = w.size
        out = np.zeros((ne, P))
        # volume term: int delta f(u) psi' dx; the Jacobians h/2 and 2/h cancel
        for e in range(ne):
            for q in range(nq):
                u = 0.0
                for k in range(P):
                    u += U[e, k] * V[q, k]
                val = dq[e, q] * f(u, prm) * w[q]
                for k in range(P):
                    out[e, k] += val * D[q, k]
        if kind < 0 or fdelta == 0.0:
            return out
        # facet term: + delta f_n(u+, u-, n) [[v]],  [[v]] = v+ - v-
        if kind == 0:
            um = 0.0
            up = 0.0
            sign = 1.0
            for k in range(P):
                um += U[eL, k]
                up += U[eR, k] * sign
                sign = -sign
            flux = fdelta * fn(up, um, 1.0, prm)
            sign = 1.0
            for k in range(P):
                out[eR, k] += flux * sign
                out[eL, k] -= flux
                sign = -sign
        elif kind == 1:
            um = 0.0
            sign = 1.0
            for k in range(P):
                um += U[eR, k] * sign
                sign = -sign
            up = alpha * um + beta
            flux = fdelta * fn(up, um, -1.0, prm)
            sign = 1.0
            for k in range(P):
                out[eR, k] -= flux * sign
                sign = -sign
        else:
            um = 0.0
            for k in range(P):
                um += U[eL, k]
            up = alpha * um + beta
            flux = fdelta * fn(up, um, 1.0, prm)
            for k in range(P):
                out[eL, k] -= flux
        return out

    @njit(cache=False)
    def solve_M(R, hs, slope, V, w, prm, linear, tol, max_iter):
        """Invert ``W -> M(W)`` element by element.

        Returns (U, status, element, residual norm).
        """
        ne, P = R.shape
        nq = w.size
        U = np.empty((ne, P))
        J = np.empty((P, P))
        res = np.empty(P)
        for e in range(ne):
            jac = 0.5 * hs[e]
            rnorm = 0.0
            for k in range(P):
                U[e, k] = R[e, k] * (2 * k + 1) / hs[e]
                rnorm += R[e, k] * R[e, k]
            bound = tol * (1.0 + np.sqrt(rnorm))
            it = 0
            while True:
                for k in range(P):
                    res[k] = -R[e, k]
                J[:, :] = 0.0
                for q in range(nq):
                    u = 0.0
                    for k in range(P):
                        u += U[e, k] * V[q, k]
                    val = (g(u, prm) - f(u, prm) * slope[e]) * w[q] * jac
                    der = (dg(u, prm) - df(u, prm) * slope[e]) * w[q] * jac
                    for i in range(P):
                        res[i] += val * V[q, i]
                        for j in range(P):
                            J[i, j] += der * V[q, i] * V[q, j]
                rn = 0.0
                for k in range(P):
                    rn += res[k] * res[k]
                rn = np.sqrt(rn)
                if rn <= bound:
                    break
                if it >= max_iter:
                    return U, NOT_CONVERGED, e, rn
                if linear:
                    # U = J^{-1} R directly: one solve, no iteration
                    sol, ok = _small_solve(J, R[e].copy())
                    if not ok:
                        return U, SINGULAR, e, rn
                    for k in range(P):
                        U[e, k] = sol[k]
                    break
                step, ok = _small_solve(J, res)
                if not ok:
                    return U, SINGULAR, e, rn
                for k in range(P):
                    U[e, k] -= step[k]
                it += 1
        return U, OK, -1, 0.0

    return apply_M, apply_M1, apply_A, solve_M
