"""Pure-Python (numpy) versions of the compiled kernels in ``_core.pyx``.

Same call signatures, same in-place outputs, same return tuples.
"""

import numpy as np


_MAX_ACTIVE_SWEEPS = 10000


def _cd_update(gram, b, i, half, z, q, diag, t):
    if t == i or diag[t] <= 0.0:
        return
    zt = z[t]
    rho = b[t] - (q[t] - diag[t] * zt)
    if rho > half:
        new = (rho - half) / diag[t]
    elif rho < -half:
        new = (rho + half) / diag[t]
    else:
        new = 0.0
    delta = new - zt
    if delta != 0.0:
        z[t] = new
        q += gram[t] * delta


def lasso_cd(gram, b, i, lam, max_iters, tol, z):
    n = gram.shape[0]
    half = 0.5 * lam
    z[i] = 0.0
    q = np.zeros(n)
    for t in np.flatnonzero(z):
        q += gram[t] * z[t]
    diag = np.diag(gram)
    sweep = 0
    res = 0.0
    while sweep < max_iters:
        sweep += 1
        for t in range(n):
            _cd_update(gram, b, i, half, z, q, diag, t)
        res = _kkt(q - b, z, half, i)
        if res <= tol:
            break
        # active coordinates are nonzero, hence never i and with diag > 0
        active = np.flatnonzero(z != 0.0)
        rest = np.flatnonzero(z == 0.0)
        z_start = z[active].copy()
        for _ in range(_MAX_ACTIVE_SWEEPS):
            for t in active:
                zt = z[t]
                rho = b[t] - (q[t] - diag[t] * zt)
                if rho > half:
                    new = (rho - half) / diag[t]
                elif rho < -half:
                    new = (rho + half) / diag[t]
                else:
                    new = 0.0
                delta = new - zt
                if delta != 0.0:
                    z[t] = new
                    q[active] += gram[t, active] * delta
            if active.size == 0 or _kkt(q[active] - b[active], z[active], half, -1) <= 0.5 * tol:
                break
        for t, zs in zip(active, z_start):
            delta = z[t] - zs
            if delta != 0.0:
                q[rest] += gram[t, rest] * delta
    return sweep, res


def _kkt(g, z, half, i):
    r = np.where(
        z > 0, np.abs(g + half), np.where(z < 0, np.abs(g - half), np.maximum(np.abs(g) - half, 0.0))
    )
    if i >= 0:
        r[i] = 0.0
    return float(r.max()) if r.size else 0.0


def fpgd_run(xr, x, c, z0, i, s, eta, gamma, gbound, max_iters, window, tol,
             z, v, vsnap, tr_obj, tr_supp, tr_grad):
    xr = np.asarray(xr)
    c = np.asarray(c)
    in_c = c > 0
    thr = np.where(in_c, np.sqrt(2.0 * s * gamma * np.where(in_c, c, 0.0)), -1.0)

    z[:] = z0
    v[:] = z0
    vsnap[:] = z0
    z[i] = 0.0
    v[i] = 0.0
    obj_prev = _objective(xr, x, c, z, gamma)
    obj0 = obj_prev
    obj_k0m1 = obj_prev
    k0 = 1
    stable = 0
    status = 1
    iters = 0

    for k in range(1, max_iters + 1):
        alpha = 2.0 / (k + 1.0)
        lam_k = eta * k
        m = (1.0 - alpha) * z + alpha * v
        nz = np.flatnonzero(m)
        r = m[nz] @ xr[nz] - x
        grad = 2.0 * (xr @ r)
        grad[i] = 0.0
        gn = float(np.sqrt(grad @ grad))
        if gn > gbound:
            status = 2
            iters = k
            break
        tr_grad[k - 1] = gn

        znew = m - s * grad
        znew[in_c & (np.abs(znew) <= thr)] = 0.0
        znew[i] = 0.0
        new_nz = znew[in_c] != 0.0
        changed = bool(np.any(new_nz != (z[in_c] != 0.0)))
        if changed:
            k0 = k
            obj_k0m1 = obj_prev
            vsnap[:] = v
        vt = v - lam_k * grad
        vt[in_c & (znew == 0.0)] = 0.0
        z[:] = znew
        v[:] = vt

        obj = _objective(xr, x, c, z, gamma)
        tr_obj[k - 1] = obj
        tr_supp[k - 1] = int(new_nz.sum())
        iters = k
        stable = 0 if changed else stable + 1
        if window > 0 and stable >= window and abs(obj - obj_prev) < tol:
            status = 0
            break
        obj_prev = obj

    return iters, status, k0, obj0, obj_k0m1


def _objective(xr, x, c, z, gamma):
    nz = np.flatnonzero(z)
    r = x - z[nz] @ xr[nz]
    reg = c[nz]
    return float(r @ r) + gamma * float(reg[reg > 0].sum())
