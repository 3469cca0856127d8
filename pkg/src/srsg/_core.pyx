# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: lasso coordinate descent and the FPGD-SP iteration.

Both functions mirror :mod:`srsg._core_py` exactly in semantics; the
pure-Python module is the fallback when this extension is not built.
"""

from libc.math cimport sqrt, fabs

import numpy as np


cdef Py_ssize_t _MAX_ACTIVE_SWEEPS = 10000


cdef inline double _soft(double a, double t) noexcept nogil:
    if a > t:
        return a - t
    if a < -t:
        return a + t
    return 0.0


def lasso_cd(const double[:, ::1] gram, const double[::1] b, Py_ssize_t i,
             double lam, Py_ssize_t max_iters, double tol, double[::1] z):
    """Cyclic coordinate descent for ``z'Gz - 2b'z + lam*|z|_1`` with ``z[i] = 0``.

    Each full sweep is followed by sweeps over the nonzero coordinates
    only, until those satisfy the optimality conditions to ``tol / 2``.
    During those sweeps the covariance ``q = Gz`` is kept current on the
    active coordinates and brought up to date elsewhere afterwards.
    ``z`` is updated in place (warm start). Returns ``(sweeps, residual)``
    where ``sweeps`` counts full sweeps and ``residual`` is the KKT
    residual of the half-gradient ``Gz - b``.
    """
    cdef Py_ssize_t n = gram.shape[0]
    cdef Py_ssize_t t, u, a, na, sweep = 0, inner
    cdef double half = 0.5 * lam
    cdef double res = 0.0, ares, rho, new, delta
    cdef double[::1] q = np.zeros(n)
    cdef double[::1] z_start = np.zeros(n)
    cdef Py_ssize_t[::1] active = np.zeros(n, dtype=np.intp)
    cdef char[::1] in_active = np.zeros(n, dtype=np.int8)

    with nogil:
        z[i] = 0.0
        for t in range(n):
            if z[t] != 0.0:
                for u in range(n):
                    q[u] += gram[t, u] * z[t]
        while sweep < max_iters:
            sweep += 1
            for t in range(n):
                _cd_update(gram, b, i, half, z, q, t)
            res = _kkt(q, b, z, half, i, n)
            if res <= tol:
                break
            na = 0
            for t in range(n):
                in_active[t] = 0
                if z[t] != 0.0:
                    active[na] = t
                    in_active[t] = 1
                    z_start[t] = z[t]
                    na += 1
            for inner in range(_MAX_ACTIVE_SWEEPS):
                for a in range(na):
                    t = active[a]
                    rho = b[t] - (q[t] - gram[t, t] * z[t])
                    new = _soft(rho, half) / gram[t, t]
                    delta = new - z[t]
                    if delta != 0.0:
                        z[t] = new
                        for u in range(na):
                            q[active[u]] += gram[t, active[u]] * delta
                ares = 0.0
                for a in range(na):
                    t = active[a]
                    ares = max(ares, _kkt_coord(q[t] - b[t], z[t], half))
                if ares <= 0.5 * tol:
                    break
            for a in range(na):
                t = active[a]
                delta = z[t] - z_start[t]
                if delta != 0.0:
                    for u in range(n):
                        if not in_active[u]:
                            q[u] += gram[t, u] * delta
    return sweep, res


cdef inline void _cd_update(const double[:, ::1] gram, const double[::1] b, Py_ssize_t i,
                            double half, double[::1] z, double[::1] q, Py_ssize_t t) noexcept nogil:
    cdef Py_ssize_t u, n = gram.shape[0]
    cdef double rho, new, delta
    if t == i or gram[t, t] <= 0.0:
        return
    rho = b[t] - (q[t] - gram[t, t] * z[t])
    new = _soft(rho, half) / gram[t, t]
    delta = new - z[t]
    if delta != 0.0:
        z[t] = new
        for u in range(n):
            q[u] += gram[t, u] * delta


cdef inline double _kkt_coord(double g, double zt, double half) noexcept nogil:
    cdef double r
    if zt > 0.0:
        return fabs(g + half)
    if zt < 0.0:
        return fabs(g - half)
    r = fabs(g) - half
    return r if r > 0.0 else 0.0


cdef double _kkt(double[::1] q, const double[::1] b, double[::1] z, double half,
                 Py_ssize_t i, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t t
    cdef double res = 0.0, r
    for t in range(n):
        if t == i:
            continue
        r = _kkt_coord(q[t] - b[t], z[t], half)
        if r > res:
            res = r
    return res


def fpgd_run(const double[:, ::1] xr, const double[::1] x, const double[::1] c,
             const double[::1] z0, Py_ssize_t i, double s, double eta, double gamma,
             double gbound, Py_ssize_t max_iters, Py_ssize_t window, double tol,
             double[::1] z, double[::1] v, double[::1] vsnap,
             double[::1] tr_obj, long[::1] tr_supp, double[::1] tr_grad):
    """Run FPGD-SP from ``z0`` for column ``i``.

    ``xr`` holds samples as rows (n, d). Outputs are written into ``z``,
    ``v``, ``vsnap`` (momentum iterate just before the last support change)
    and the trace arrays. Returns ``(iters, status, k0, obj0, obj_k0m1)``;
    status 0 = stopped by the stability rule, 1 = iteration cap,
    2 = gradient bound violated at iteration ``iters``.
    """
    cdef Py_ssize_t n = xr.shape[0]
    cdef Py_ssize_t d = xr.shape[1]
    cdef Py_ssize_t k, t, l, status = 1, k0 = 1, stable = 0, iters = 0, supp
    cdef double alpha, lam_k, gn, acc, obj, obj0, obj_prev, obj_k0m1, val
    cdef bint changed, nz_new
    cdef double[::1] m = np.zeros(n)
    cdef double[::1] grad = np.zeros(n)
    cdef double[::1] r = np.zeros(d)
    cdef double[::1] znew = np.zeros(n)
    cdef double[::1] thr = np.zeros(n)

    with nogil:
        for t in range(n):
            z[t] = z0[t]
            v[t] = z0[t]
            vsnap[t] = z0[t]
            if c[t] > 0.0:
                thr[t] = sqrt(2.0 * s * gamma * c[t])
            else:
                thr[t] = -1.0
        z[i] = 0.0
        v[i] = 0.0
        obj_prev = _objective(xr, x, c, z, gamma, r)
        obj0 = obj_prev
        obj_k0m1 = obj_prev

        for k in range(1, max_iters + 1):
            alpha = 2.0 / (k + 1.0)
            lam_k = eta * k
            for l in range(d):
                r[l] = -x[l]
            for t in range(n):
                m[t] = (1.0 - alpha) * z[t] + alpha * v[t]
                if m[t] != 0.0:
                    for l in range(d):
                        r[l] += m[t] * xr[t, l]
            gn = 0.0
            for t in range(n):
                if t == i:
                    grad[t] = 0.0
                    continue
                acc = 0.0
                for l in range(d):
                    acc += xr[t, l] * r[l]
                grad[t] = 2.0 * acc
                gn += grad[t] * grad[t]
            gn = sqrt(gn)
            if gn > gbound:
                status = 2
                iters = k
                break
            tr_grad[k - 1] = gn

            changed = False
            supp = 0
            for t in range(n):
                val = m[t] - s * grad[t]
                if t == i:
                    val = 0.0
                elif thr[t] >= 0.0 and fabs(val) <= thr[t]:
                    val = 0.0
                znew[t] = val
                if thr[t] >= 0.0:
                    nz_new = val != 0.0
                    if nz_new:
                        supp += 1
                    if nz_new != (z[t] != 0.0):
                        changed = True
            if changed:
                k0 = k
                obj_k0m1 = obj_prev
                for t in range(n):
                    vsnap[t] = v[t]
            for t in range(n):
                z[t] = znew[t]
                val = v[t] - lam_k * grad[t]
                if thr[t] >= 0.0 and znew[t] == 0.0:
                    val = 0.0
                v[t] = val

            obj = _objective(xr, x, c, z, gamma, r)
            tr_obj[k - 1] = obj
            tr_supp[k - 1] = supp
            iters = k
            if changed:
                stable = 0
            else:
                stable += 1
            if window > 0 and stable >= window and fabs(obj - obj_prev) < tol:
                status = 0
                obj_prev = obj
                break
            obj_prev = obj

    return iters, status, k0, obj0, obj_k0m1


cdef double _objective(const double[:, ::1] xr, const double[::1] x, const double[::1] c,
                       double[::1] z, double gamma, double[::1] r) noexcept nogil:
    cdef Py_ssize_t n = xr.shape[0]
    cdef Py_ssize_t d = xr.shape[1]
    cdef Py_ssize_t t, l
    cdef double fit = 0.0, reg = 0.0
    for l in range(d):
        r[l] = x[l]
    for t in range(n):
        if z[t] != 0.0:
            for l in range(d):
                r[l] -= z[t] * xr[t, l]
            if c[t] > 0.0:
                reg += c[t]
    for l in range(d):
        fit += r[l] * r[l]
    return fit + gamma * reg
