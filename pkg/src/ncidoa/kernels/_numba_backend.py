"""JIT-compiled hot loops: grid cost evaluation and the inner z-solver.

Mirrors ``_numpy_backend`` function for function; keep the two in sync.
All matrices are small (L x L with L ~ 6) so everything is explicit loops
plus BLAS-backed ``np.dot`` on float64.
"""

import math

import numpy as np
from numba import njit

_SQRT3 = math.sqrt(3.0)
_SERIES_CUTOFF = 1e-2


@njit(cache=True)
def _cosval(family, arg, spread):
    if family == 0:
        x = arg * spread
        return math.exp(-0.5 * x * x)
    u = arg * spread * _SQRT3
    if abs(u) < _SERIES_CUTOFF:
        u2 = u * u
        return 1.0 - u2 / 6.0 + u2 * u2 / 120.0
    return math.sin(u) / u


@njit(cache=True)
def pav_nonincreasing(y):
    n = y.shape[0]
    vals = np.empty(n)
    counts = np.empty(n, np.int64)
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
    out = np.empty(n)
    k = 0
    for b in range(j + 1):
        for _ in range(counts[b]):
            out[k] = vals[b]
            k += 1
    return out


@njit(cache=True)
def project_monotone_box(y):
    out = pav_nonincreasing(y)
    for i in range(out.shape[0]):
        if out[i] < 0.0:
            out[i] = 0.0
        elif out[i] > 1.0:
            out[i] = 1.0
    return out


@njit(cache=True)
def _theta_mats(theta, spacing, R1, R2):
    """Per-angle reduction matrices U1 = a a^H^T .* R1^T (real part kept
    separately) and U2 = a a^T .* conj(R2)."""
    L = R1.shape[0]
    a = np.empty(L, np.complex128)
    s = math.sin(theta)
    for p in range(L):
        ph = 2.0 * math.pi * spacing * p * s
        a[p] = complex(math.cos(ph), math.sin(ph))
    U1re = np.empty((L, L))
    U2re = np.empty((L, L))
    U2im = np.empty((L, L))
    for p in range(L):
        for l in range(L):
            u1 = a[p] * a[l].conjugate() * R1[l, p]
            U1re[p, l] = u1.real
            u2 = a[p] * a[l] * R2[p, l].conjugate()
            U2re[p, l] = u2.real
            U2im[p, l] = u2.imag
    return U1re, U2re, U2im


@njit(cache=True)
def fc_grid(thetas, sigmas, family, spacing, R1, R2):
    """Compressed cost Re{z1} - |z2| on a (theta, sigma) grid."""
    Gt = thetas.shape[0]
    Gs = sigmas.shape[0]
    L = R1.shape[0]
    out = np.empty((Gt, Gs))
    T = np.empty((L, L))
    Tp = np.empty((L, L))
    for i in range(Gt):
        U1re, U2re, U2im = _theta_mats(thetas[i], spacing, R1, R2)
        g2pi = 2.0 * math.pi * spacing * math.cos(thetas[i])
        for j in range(Gs):
            sg = sigmas[j]
            for p in range(L):
                for l in range(L):
                    T[p, l] = _cosval(family, g2pi * (p - l), sg)
                    Tp[p, l] = _cosval(family, g2pi * (p + l), sg)
            A = np.dot(T, T) + np.dot(Tp, Tp)
            B = np.dot(T, Tp) + np.dot(Tp, T)
            rez1 = 0.0
            z2re = 0.0
            z2im = 0.0
            for p in range(L):
                for l in range(L):
                    rez1 += A[p, l] * U1re[p, l]
                    z2re += B[p, l] * U2re[p, l]
                    z2im += B[p, l] * U2im[p, l]
            out[i, j] = rez1 - math.hypot(z2re, z2im)
    return out


@njit(cache=True)
def _build_zmats(z, L):
    Z = np.empty((L, L))
    Zp = np.empty((L, L))
    for p in range(L):
        for l in range(L):
            m = p - l if p >= l else l - p
            Z[p, l] = 1.0 if m == 0 else z[m - 1]
            m2 = p + l
            Zp[p, l] = 1.0 if m2 == 0 else z[m2 - 1]
    return Z, Zp


@njit(cache=True)
def _cost_eval(Z, Zp, U1re, U2re, U2im):
    S1 = np.dot(Z, Z) + np.dot(Zp, Zp)
    S2 = np.dot(Z, Zp) + np.dot(Zp, Z)
    L = Z.shape[0]
    rez1 = 0.0
    z2re = 0.0
    z2im = 0.0
    for p in range(L):
        for l in range(L):
            rez1 += S1[p, l] * U1re[p, l]
            z2re += S2[p, l] * U2re[p, l]
            z2im += S2[p, l] * U2im[p, l]
    return rez1 - math.hypot(z2re, z2im), z2re, z2im


@njit(cache=True)
def _grad_eval(Z, Zp, U1re, U2re, U2im, z2re, z2im, grad):
    L = Z.shape[0]
    D1 = np.dot(U1re, Z) + np.dot(Z, U1re)
    D1p = np.dot(U1re, Zp) + np.dot(Zp, U1re)
    r = math.hypot(z2re, z2im)
    if r > 1e-300:
        ur = z2re / r
        ui = -z2im / r
        M2re = np.dot(U2re, Zp) + np.dot(Zp, U2re)
        M2im = np.dot(U2im, Zp) + np.dot(Zp, U2im)
        N2re = np.dot(U2re, Z) + np.dot(Z, U2re)
        N2im = np.dot(U2im, Z) + np.dot(Z, U2im)
        for p in range(L):
            for l in range(L):
                D1[p, l] -= ur * M2re[p, l] - ui * M2im[p, l]
                D1p[p, l] -= ur * N2re[p, l] - ui * N2im[p, l]
    for i in range(grad.shape[0]):
        grad[i] = 0.0
    for p in range(L):
        for l in range(L):
            m = p - l if p >= l else l - p
            if m >= 1:
                grad[m - 1] += D1[p, l]
            m2 = p + l
            if m2 >= 1:
                grad[m2 - 1] += D1p[p, l]


@njit(cache=True)
def _pgd(U1re, U2re, U2im, z0, max_iters, stat_tol, L):
    n = z0.shape[0]
    z = project_monotone_box(z0)
    Z, Zp = _build_zmats(z, L)
    cost, z2re, z2im = _cost_eval(Z, Zp, U1re, U2re, U2im)
    grad = np.empty(n)
    step = 1.0
    iters = 0
    converged = False
    for it in range(max_iters):
        _grad_eval(Z, Zp, U1re, U2re, U2im, z2re, z2im, grad)
        pg2 = 0.0
        trial = project_monotone_box(z - grad)
        for i in range(n):
            d = z[i] - trial[i]
            pg2 += d * d
        if math.sqrt(pg2) <= stat_tol:
            converged = True
            break
        step = min(step * 2.0, 1e8)
        accepted = False
        stationary = False
        for _ in range(64):
            znew = project_monotone_box(z - step * grad)
            dd = 0.0
            gd = 0.0
            for i in range(n):
                d = znew[i] - z[i]
                dd += d * d
                gd += grad[i] * d
            if dd == 0.0:
                stationary = True
                break
            Zn, Zpn = _build_zmats(znew, L)
            cnew, nre, nim = _cost_eval(Zn, Zpn, U1re, U2re, U2im)
            if cnew <= cost + gd + 0.5 * dd / step:
                accepted = True
                z = znew
                Z = Zn
                Zp = Zpn
                cost = cnew
                z2re = nre
                z2im = nim
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


@njit(cache=True)
def profile_theta(thetas, spacing, R1, R2, z_init, max_iters, stat_tol):
    """min_z of the structure-constrained cost at each angle of the grid."""
    G = thetas.shape[0]
    L = R1.shape[0]
    n = z_init.shape[1]
    costs = np.empty(G)
    zstar = np.empty((G, n))
    iters = np.zeros(G, np.int64)
    conv = np.zeros(G, np.bool_)
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
