"""Independent numerical references used by the test suite and `selftest`.

Everything here deliberately avoids the closed forms in
:mod:`ncidoa.covariance`: spread factors are computed by adaptive
quadrature of their defining integrals, and derivative checks use central
finite differences.  Keep it that way; these functions are the second
route in every dual-route check.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate

from .arrays import steering_vector
from .sources import AngularFamily, density

__all__ = [
    "quad_T",
    "quad_Tprime",
    "quad_Rss",
    "quad_Rss_prime",
    "quad_ext_Rss",
    "central_diff",
    "central_diff_matrix",
]


def _support(family, central, spread):
    family = AngularFamily.coerce(family)
    if family is AngularFamily.GAUSSIAN:
        # +-8 sigma leaves < 1e-15 of the mass outside
        return central - 8.0 * spread, central + 8.0 * spread
    half = np.sqrt(3.0) * spread
    return central - half, central + half


def _quad_density(family, central, spread, fn):
    lo, hi = _support(family, central, spread)
    val, _ = integrate.quad(
        lambda th: density(family, central, spread, th) * fn(th),
        lo,
        hi,
        epsabs=1e-12,
        epsrel=1e-12,
        limit=400,
    )
    return val


def quad_T(family, central, spread, geom) -> np.ndarray:
    """Spread factor T by quadrature of its cosine integral."""
    L = geom.sensor_count
    fp = geom.phase_frac_rate(central)
    out = np.ones((L, L))
    if spread == 0:
        return out
    for p in range(L):
        for l in range(p + 1):
            coeff = 2 * np.pi * (fp[p] - fp[l])
            out[p, l] = out[l, p] = _quad_density(
                family, central, spread, lambda th: np.cos(coeff * (th - central))
            )
    return out


def quad_Tprime(family, central, spread, geom) -> np.ndarray:
    """Spread factor T' by quadrature of its cosine integral."""
    L = geom.sensor_count
    fp = geom.phase_frac_rate(central)
    out = np.ones((L, L))
    if spread == 0:
        return out
    for p in range(L):
        for l in range(p + 1):
            coeff = 2 * np.pi * (fp[p] + fp[l])
            out[p, l] = out[l, p] = _quad_density(
                family, central, spread, lambda th: np.cos(coeff * (th - central))
            )
    return out


def _quad_outer(family, central, spread, geom, conjugate: bool) -> np.ndarray:
    """Un-approximated E{a(theta) a(theta)^{H or T}} under the density."""
    L = geom.sensor_count
    out = np.zeros((L, L), dtype=complex)
    for p in range(L):
        for l in range(L):

            def entry(th):
                a = steering_vector(geom, th)
                other = np.conj(a[l]) if conjugate else a[l]
                return a[p] * other

            re = _quad_density(family, central, spread, lambda th: entry(th).real)
            im = _quad_density(family, central, spread, lambda th: entry(th).imag)
            out[p, l] = re + 1j * im
    return out


def quad_Rss(family, central, spread, geom) -> np.ndarray:
    return _quad_outer(family, central, spread, geom, conjugate=True)


def quad_Rss_prime(family, central, spread, geom) -> np.ndarray:
    return _quad_outer(family, central, spread, geom, conjugate=False)


def quad_ext_Rss(family, central, spread, phi, geom) -> np.ndarray:
    """Extended noise-free covariance from the defining integral."""
    Rss = quad_Rss(family, central, spread, geom)
    Rssp = quad_Rss_prime(family, central, spread, geom)
    u = np.exp(1j * phi)
    top = np.hstack([Rss, u * Rssp])
    bot = np.hstack([np.conj(u * Rssp), np.conj(Rss)])
    return np.vstack([top, bot])


def central_diff(fn, x: float, h: float) -> float:
    """Plain second-order central difference of a scalar function."""
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def central_diff_matrix(fn, x: float, h: float) -> np.ndarray:
    """Central difference of a matrix-valued function of a scalar."""
    return (np.asarray(fn(x + h)) - np.asarray(fn(x - h))) / (2.0 * h)
