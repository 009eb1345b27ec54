"""Closed-form covariance construction for spread noncircular sources.

The noise-free conjugated/unconjugated covariances of a small-spread
symmetric source factor as ``Phi T Phi^H`` and ``Phi T' Phi^T`` where
``Phi = diag(a(central))`` and T, T' are real symmetric matrices whose
entries are cosine transforms of the centered angular density:

    T[p, l]  = E cos(2*pi*(f'_p - f'_l)(central) * dev)
    T'[p, l] = E cos(2*pi*(f'_p + f'_l)(central) * dev)

with ``dev`` distributed per the density.  For the Gaussian family the
transform is ``exp(-arg^2 * spread^2 / 2)`` and for the uniform family
``sin(u)/u`` with ``u = arg * sqrt(3) * spread``; both are exact, the
small-spread approximation lives entirely in the rank-reduced factoring.
Zero spread yields all-ones matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import steering_vector
from .errors import SingularCovarianceError
from .sources import AngularFamily, Scenario

__all__ = [
    "SpreadFactorization",
    "CovarianceSet",
    "InvSquareBlocks",
    "cosine_transform",
    "cosine_transform_derivs",
    "build_T",
    "build_Tprime",
    "spread_factorization",
    "build_T_derivs",
    "build_Rss",
    "build_Rss_prime",
    "build_extended_Rss",
    "theoretical_cov",
    "sample_extended_cov",
    "inv_square_blocks",
]

_SQRT3 = np.sqrt(3.0)
# below this, sin(u)/u and friends switch to series to avoid cancellation
_SINC_SERIES_CUTOFF = 1e-2


def _sinc(u):
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SINC_SERIES_CUTOFF
    us = np.where(small, 0.0, u)
    u2 = u * u
    series = 1.0 - u2 / 6.0 + u2 * u2 / 120.0
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = np.where(small, 1.0, np.sin(us) / np.where(small, 1.0, us))
    return np.where(small, series, exact)


def _sinc_d1(u):
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SINC_SERIES_CUTOFF
    us = np.where(small, 1.0, u)
    u2 = u * u
    series = -u / 3.0 + u * u2 / 30.0
    exact = (us * np.cos(us) - np.sin(us)) / (us * us)
    return np.where(small, series, exact)


def _sinc_d2(u):
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SINC_SERIES_CUTOFF
    us = np.where(small, 1.0, u)
    u2 = u * u
    series = -1.0 / 3.0 + u2 / 10.0 - u2 * u2 / 168.0
    exact = ((2.0 - us * us) * np.sin(us) - 2.0 * us * np.cos(us)) / (us**3)
    return np.where(small, series, exact)


def cosine_transform(family, arg, spread: float):
    """E cos(arg * dev) for a centered deviation with the given spread."""
    family = AngularFamily.coerce(family)
    arg = np.asarray(arg, dtype=float)
    if family is AngularFamily.GAUSSIAN:
        return np.exp(-0.5 * (arg * spread) ** 2)
    return _sinc(arg * (_SQRT3 * spread))


def cosine_transform_derivs(family, arg, spread: float) -> dict:
    """Value and partial derivatives of the cosine transform.

    Returns keys ``val, d_arg, d_spread, d_arg_arg, d_arg_spread,
    d_spread_spread`` evaluated elementwise on ``arg``.
    """
    family = AngularFamily.coerce(family)
    a = np.asarray(arg, dtype=float)
    s = float(spread)
    if family is AngularFamily.GAUSSIAN:
        c = np.exp(-0.5 * (a * s) ** 2)
        return {
            "val": c,
            "d_arg": -a * s**2 * c,
            "d_spread": -(a**2) * s * c,
            "d_arg_arg": (-(s**2) + a**2 * s**4) * c,
            "d_arg_spread": (-2.0 * a * s + a**3 * s**3) * c,
            "d_spread_spread": (-(a**2) + a**4 * s**2) * c,
        }
    u = a * (_SQRT3 * s)
    s0, s1, s2 = _sinc(u), _sinc_d1(u), _sinc_d2(u)
    return {
        "val": s0,
        "d_arg": s1 * (_SQRT3 * s),
        "d_spread": s1 * (_SQRT3 * a),
        "d_arg_arg": s2 * (3.0 * s**2),
        "d_arg_spread": s2 * (3.0 * a * s) + s1 * _SQRT3,
        "d_spread_spread": s2 * (3.0 * a**2),
    }


def _index_diff(L: int) -> np.ndarray:
    idx = np.arange(L)
    return (idx[:, None] - idx[None, :]).astype(float)


def _index_sum(L: int) -> np.ndarray:
    idx = np.arange(L)
    return (idx[:, None] + idx[None, :]).astype(float)


def _rate_args(geom, theta: float):
    """2*pi*(f'_p -/+ f'_l)(theta) matrices for any planar geometry."""
    fp = geom.phase_frac_rate(theta)
    diff = 2 * np.pi * (fp[:, None] - fp[None, :])
    summ = 2 * np.pi * (fp[:, None] + fp[None, :])
    return diff, summ


def build_T(family, central_doa: float, spread: float, geom) -> np.ndarray:
    """Conjugated spread factor; symmetric Toeplitz for a separable geometry."""
    diff, _ = _rate_args(geom, central_doa)
    return cosine_transform(family, diff, spread)


def build_Tprime(family, central_doa: float, spread: float, geom) -> np.ndarray:
    """Unconjugated spread factor; Hankel for a separable geometry."""
    _, summ = _rate_args(geom, central_doa)
    return cosine_transform(family, summ, spread)


@dataclass(frozen=True)
class SpreadFactorization:
    """The (T, T') pair for one source; unit diagonal anchor T[0, 0] = 1."""

    T: np.ndarray
    Tprime: np.ndarray


def spread_factorization(family, central_doa, spread, geom) -> SpreadFactorization:
    return SpreadFactorization(
        T=build_T(family, central_doa, spread, geom),
        Tprime=build_Tprime(family, central_doa, spread, geom),
    )


def build_T_derivs(family, central_doa, spread, geom, kind: str = "diff") -> dict:
    """T (or T') with partials in (theta, sigma) up to second order.

    Requires a separable geometry (f'_l = l * g) so the chain rule runs
    through the scalar g(theta).  Keys: ``val, d_theta, d_sigma,
    d_theta_theta, d_theta_sigma, d_sigma_sigma``.
    """
    L = geom.sensor_count
    m = _index_diff(L) if kind == "diff" else _index_sum(L)
    g = geom.phase_rate(central_doa)
    g1 = geom.phase_rate_derivative(central_doa)
    g2 = geom.phase_rate_curvature(central_doa)
    arg = 2 * np.pi * m * g
    arg_t = 2 * np.pi * m * g1
    arg_tt = 2 * np.pi * m * g2
    c = cosine_transform_derivs(family, arg, spread)
    return {
        "val": c["val"],
        "d_theta": c["d_arg"] * arg_t,
        "d_sigma": c["d_spread"],
        "d_theta_theta": c["d_arg_arg"] * arg_t**2 + c["d_arg"] * arg_tt,
        "d_theta_sigma": c["d_arg_spread"] * arg_t,
        "d_sigma_sigma": c["d_spread_spread"],
    }


def build_Rss(family, central_doa, spread, geom) -> np.ndarray:
    """Normalized conjugated noise-free covariance (a a^H) Hadamard T."""
    a = steering_vector(geom, central_doa)
    return (a[:, None] * np.conj(a)[None, :]) * build_T(
        family, central_doa, spread, geom
    )


def build_Rss_prime(family, central_doa, spread, geom) -> np.ndarray:
    """Normalized unconjugated noise-free covariance (a a^T) Hadamard T'."""
    a = steering_vector(geom, central_doa)
    return (a[:, None] * a[None, :]) * build_Tprime(family, central_doa, spread, geom)


def _extended_blocks(Rss, Rss_prime, phi):
    u = np.exp(1j * phi)
    top = np.hstack([Rss, u * Rss_prime])
    bot = np.hstack([np.conj(u * Rss_prime), np.conj(Rss)])
    return np.vstack([top, bot])


def build_extended_Rss(family, central_doa, spread, phi, geom) -> np.ndarray:
    """Normalized extended (2L x 2L) noise-free covariance of one source."""
    return _extended_blocks(
        build_Rss(family, central_doa, spread, geom),
        build_Rss_prime(family, central_doa, spread, geom),
        phi,
    )


@dataclass(frozen=True)
class CovarianceSet:
    """Conjugated, unconjugated and extended model covariances."""

    Rxx: np.ndarray
    Rpxx: np.ndarray
    Rext: np.ndarray


def theoretical_cov(scenario: Scenario) -> CovarianceSet:
    """Model covariances of the scenario under the closed-form factoring."""
    L = scenario.sensor_count
    Rxx = np.zeros((L, L), dtype=complex)
    Rpxx = np.zeros((L, L), dtype=complex)
    for src in scenario.sources:
        a = steering_vector(scenario.geometry, src.central_doa)
        T = build_T(src.family, src.central_doa, src.spread, scenario.geometry)
        Tp = build_Tprime(src.family, src.central_doa, src.spread, scenario.geometry)
        Rxx += src.power * (a[:, None] * np.conj(a)[None, :]) * T
        if src.nc_rate > 0:
            Rpxx += (
                src.power
                * src.nc_rate
                * np.exp(1j * src.nc_phase)
                * (a[:, None] * a[None, :])
                * Tp
            )
    Rxx += scenario.noise_variance * np.eye(L)
    top = np.hstack([Rxx, Rpxx])
    bot = np.hstack([np.conj(Rpxx), np.conj(Rxx)])
    return CovarianceSet(Rxx=Rxx, Rpxx=Rpxx, Rext=np.vstack([top, bot]))


def sample_extended_cov(X: np.ndarray) -> np.ndarray:
    """Sample mean of [x; conj(x)] outer products over the snapshot axis."""
    X = np.asarray(X)
    n = X.shape[1]
    Sxx = (X @ np.conj(X.T)) / n
    Sxp = (X @ X.T) / n
    top = np.hstack([Sxx, Sxp])
    bot = np.hstack([np.conj(Sxp), np.conj(Sxx)])
    return np.vstack([top, bot])


@dataclass(frozen=True)
class InvSquareBlocks:
    """Top-left (Hermitian) and top-right (symmetric) blocks of Rext^-2."""

    R1: np.ndarray
    R2: np.ndarray

    def full(self) -> np.ndarray:
        top = np.hstack([self.R1, self.R2])
        bot = np.hstack([np.conj(self.R2), np.conj(self.R1)])
        return np.vstack([top, bot])


def inv_square_blocks(Rext: np.ndarray, cond_tol: float = 1e-12) -> InvSquareBlocks:
    """Inverse-square blocks via Hermitian eigendecomposition.

    Never forms the inverse first: eigenvalues are mapped to lambda^-2
    directly, which keeps the result exactly Hermitian.  Raises
    SingularCovarianceError when the spectrum spans more than 1/cond_tol
    (typically N < 2L or a degenerate model).
    """
    Rext = np.asarray(Rext)
    H = 0.5 * (Rext + np.conj(Rext.T))
    w, V = np.linalg.eigh(H)
    if w.min() <= cond_tol * w.max():
        raise SingularCovarianceError(
            f"extended covariance is numerically singular "
            f"(eigenvalue range {w.min():.3e} .. {w.max():.3e})"
        )
    L = Rext.shape[0] // 2
    M = (V * w**-2.0) @ np.conj(V.T)
    return InvSquareBlocks(R1=M[:L, :L].copy(), R2=M[:L, L:].copy())
