"""Pure-numpy twin of ``_numba_backend``; same algorithms, no JIT.

Selected by setting ``NCIDOA_NO_NUMBA=1`` (or automatically when numba is
unavailable).  The inner solver follows the identical iteration rule so
the two backends agree to floating-point noise; see the backend-parity
tests and ``benchmarks/bench_kernels.py``.
"""

import math

import numpy as np

_SQRT3 = math.sqrt(3.0)
_SERIES_CUTOFF = 1e-2


def _cosval_array(family, arg, spread):
    if family == 0:
        return np.exp(-0.5 * (arg * spread) ** 2)
    u = arg * (spread * _SQRT3)
    small = np.abs(u) < _SERIES_CUTOFF
    us = np.where(small, 1.0, u)
    u2 = u * u
    return np.where(small, 1.0 - u2 / 6.0 + u2 * u2 / 120.0, np.sin(us) / us)


def pav_nonincreasing(y):
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    vals = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    j = -1
    for i in range(n):
        j += 1
        vals[j] = y[i]
        counts[j] = 1
        while j > 0 and vals[j - 1] < vals[j]:
            tot = counts[j - 1] + counts[j]
            vals[j - 1] = (counts[j - 1] * vals[j - 1] + counts[j] * vals[j]) / tot
            counts[j - 1] = tot
            j -= 1
    return np.repeat(vals[: j + 1], counts[: j + 1])


def project_monotone_box(y):
    return np.clip(pav_nonincreasing(y), 0.0, 1.0)


def _theta_mats(theta, spacing, R1, R2):
    L = R1.shape[0]
    a = np.exp(2j * np.pi * spacing * np.arange(L) * math.sin(theta))
    U1 = a[:, None] * np.conj(a)[None, :] * R1.T
    U2 = a[:, None] * a[None, :] * np.conj(R2)
    return U1.real.copy(), U2.real.copy(), U2.imag.copy()


def fc_grid(thetas, sigmas, family, spacing, R1, R2):
    thetas = np.asarray(thetas, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    L = R1.shape[0]
    idx = np.arange(L)
    mdiff = (idx[:, None] - idx[None, :]).astype(float)
    msum = (idx[:, None] + idx[None, :]).astype(float)
    out = np.empty((thetas.size, sigmas.size))
    for i, theta in enumerate(thetas):
        U1re, U2re, U2im = _theta_mats(theta, spacing, R1, R2)
        g2pi = 2.0 * np.pi * spacing * math.cos(theta)
        # batch the sigma axis: (Gs, L, L) spread factors
        T = _cosval_array(family, g2pi * mdiff[None, :, :], sigmas[:, None, None])
        Tp = _cosval_array(family, g2pi * msum[None, :, :], sigmas[:, None, None])
        A = T @ T + Tp @ Tp
        B = T @ Tp + Tp @ T
        rez1 = np.einsum("spl,pl->s", A, U1re)
        z2re = np.einsum("spl,pl->s", B, U2re)
        z2im = np.einsum("spl,pl->s", B, U2im)
        out[i] = rez1 - np.hypot(z2re, z2im)
    return out


def _build_zmats(z, L):
    seq = np.concatenate(([1.0], z))
    idx = np.arange(L)
    Z = seq[np.abs(idx[:, None] - idx[None, :])]
    Zp = seq[idx[:, None] + idx[None, :]]
    return Z, Zp


def _cost_eval(Z, Zp, U1re, U2re, U2im):
    S1 = Z @ Z + Zp @ Zp
    S2 = Z @ Zp + Zp @ Z
    rez1 = float(np.sum(S1 * U1re))
    z2re = float(np.sum(S2 * U2re))
    z2im = float(np.sum(S2 * U2im))
    return rez1 - math.hypot(z2re, z2im), z2re, z2im


def _grad_eval(Z, Zp, U1re, U2re, U2im, z2re, z2im, n):
    L = Z.shape[0]
    D1 = U1re @ Z + Z @ U1re
    D1p = U1re @ Zp + Zp @ U1re
    r = math.hypot(z2re, z2im)
    if r > 1e-300:
        ur = z2re / r
        ui = -z2im / r
        D1 = D1 - (ur * (U2re @ Zp + Zp @ U2re) - ui * (U2im @ Zp + Zp @ U2im))
        D1p = D1p - (ur * (U2re @ Z + Z @ U2re) - ui * (U2im @ Z + Z @ U2im))
    grad = np.zeros(n)
    idx = np.arange(L)
    md = np.abs(idx[:, None] - idx[None, :])
    ms = idx[:, None] + idx[None, :]
    mask_d = md >= 1
    mask_s = ms >= 1
    np.add.at(grad, md[mask_d] - 1, D1[mask_d])
    np.add.at(grad, ms[mask_s] - 1, D1p[mask_s])
    return grad


def _pgd(U1re, U2re, U2im, z0, max_iters, stat_tol, L):
    n = z0.shape[0]
    z = project_monotone_box(z0)
    Z, Zp = _build_zmats(z, L)
    cost, z2re, z2im = _cost_eval(Z, Zp, U1re, U2re, U2im)
    step = 1.0
    iters = 0
    converged = False
    for it in range(max_iters):
        grad = _grad_eval(Z, Zp, U1re, U2re, U2im, z2re, z2im, n)
        pg = z - project_monotone_box(z - grad)
        if math.sqrt(float(pg @ pg)) <= stat_tol:
            converged = True
            break
        step = min(step * 2.0, 1e8)
        accepted = False
        stationary = False
        for _ in range(64):
            znew = project_monotone_box(z - step * grad)
            d = znew - z
            dd = float(d @ d)
            gd = float(grad @ d)
            if dd == 0.0:
                stationary = True
                break
            Zn, Zpn = _build_zmats(znew, L)
            cnew, nre, nim = _cost_eval(Zn, Zpn, U1re, U2re, U2im)
            if cnew <= cost + gd + 0.5 * dd / step:
                accepted = True
                z, Z, Zp = znew, Zn, Zpn
                cost, z2re, z2im = cnew, nre, nim
                break
            step *= 0.5
            if step < 1e-18:
                break
        if stationary:
            converged = True
            break
        if not accepted:
            break
        iters = it + 1
    return z, cost, iters, converged


def profile_theta(thetas, spacing, R1, R2, z_init, max_iters, stat_tol):
    thetas = np.asarray(thetas, dtype=float)
    G = thetas.size
    L = R1.shape[0]
    n = z_init.shape[1]
    costs = np.empty(G)
    zstar = np.empty((G, n))
    iters = np.zeros(G, dtype=np.int64)
    conv = np.zeros(G, dtype=bool)
    for g in range(G):
        U1re, U2re, U2im = _theta_mats(thetas[g], spacing, R1, R2)
        z, c, it, cv = _pgd(
            U1re, U2re, U2im, z_init[g].copy(), max_iters, stat_tol, L
        )
        costs[g] = c
        zstar[g] = z
        iters[g] = it
        conv[g] = cv
    return costs, zstar, iters, conv
