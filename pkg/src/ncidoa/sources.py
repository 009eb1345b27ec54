"""Spread-source models and snapshot synthesis.

A spread source is described by a symmetric angular power density with a
central DOA and an angular spread (the density's standard deviation), a
linear power, and a noncircularity rate/phase pair that fixes the
unconjugated second moment ``E{ss} = rate * exp(j*phase) * E{|s|^2}``.

Two independent synthesizers are provided: a physical one that
superimposes many rays drawn from the angular density, and a Gaussian one
that draws snapshots directly from a target covariance pair.  Their sample
covariances must agree, which the tests exploit as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from .arrays import UniformLinearArray, steering_vector
from .errors import DegenerateSpreadError, InvalidSpecError, NotPsdError

__all__ = [
    "AngularFamily",
    "SourceSpec",
    "Scenario",
    "density",
    "draw_angles",
    "synthesize_rays",
    "synthesize_gaussian",
]

_SQRT3 = np.sqrt(3.0)


class AngularFamily(Enum):
    """Supported symmetric angular density families."""

    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"

    @classmethod
    def coerce(cls, value) -> "AngularFamily":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidSpecError(f"unknown angular family: {value!r}") from None


@dataclass(frozen=True)
class SourceSpec:
    """One spread source: density family, central DOA and spread (radians),
    power, and noncircularity rate/phase."""

    family: AngularFamily
    central_doa: float
    spread: float
    power: float = 1.0
    nc_rate: float = 1.0
    nc_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", AngularFamily.coerce(self.family))
        if not abs(self.central_doa) < np.pi / 2:
            raise InvalidSpecError("central DOA must lie in (-pi/2, pi/2)")
        if self.spread < 0:
            raise InvalidSpecError("spread must be >= 0")
        if self.power <= 0:
            raise InvalidSpecError("power must be > 0")
        if not 0.0 <= self.nc_rate <= 1.0:
            raise InvalidSpecError("noncircularity rate must be in [0, 1]")


@dataclass(frozen=True)
class Scenario:
    """Array, sources, noise level and snapshot count for one experiment point.

    Sources are mutually uncorrelated by construction and the noise is
    circular white Gaussian.  ``noise_variance == 0`` is allowed for
    noise-free constructions; bound computations will reject it.
    """

    geometry: UniformLinearArray
    sources: Tuple[SourceSpec, ...]
    noise_variance: float = 1.0
    snapshots: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if self.noise_variance < 0:
            raise InvalidSpecError("noise variance must be >= 0")
        if self.snapshots < 1:
            raise InvalidSpecError("need at least one snapshot")

    @property
    def sensor_count(self) -> int:
        return self.geometry.sensor_count


def density(family, central_doa: float, spread: float, theta) -> np.ndarray:
    """Normalized angular power density evaluated at ``theta``.

    The spread is the density's standard deviation for every family; the
    uniform family therefore has support ``central +- sqrt(3) * spread``.
    """
    family = AngularFamily.coerce(family)
    if spread <= 0:
        raise DegenerateSpreadError(
            "point source has no density; use the zero-spread closed forms"
        )
    theta = np.asarray(theta, dtype=float)
    dev = theta - central_doa
    if family is AngularFamily.GAUSSIAN:
        return np.exp(-0.5 * (dev / spread) ** 2) / (spread * np.sqrt(2 * np.pi))
    half = _SQRT3 * spread
    return np.where(np.abs(dev) <= half, 1.0 / (2.0 * half), 0.0)


def draw_angles(family, central_doa, spread, size, rng) -> np.ndarray:
    """Sample ray angles from the angular density (delta mass if spread is 0)."""
    family = AngularFamily.coerce(family)
    if spread == 0:
        return np.full(size, central_doa, dtype=float)
    if family is AngularFamily.GAUSSIAN:
        return central_doa + spread * rng.standard_normal(size)
    return central_doa + _SQRT3 * spread * rng.uniform(-1.0, 1.0, size)


def _ray_gains(source: SourceSpec, size, rng) -> np.ndarray:
    """Per-ray complex gains realizing the prescribed unconjugated moment.

    With mix = (1 + rate) / 2 the gain c = exp(j*phase/2) * (sqrt(mix)*u +
    j*sqrt(1-mix)*v) satisfies E{c^2} = rate * exp(j*phase) * E{|c|^2}; at
    rate 1 the gain is exactly a rotated real normal (rectilinear).
    """
    mix = 0.5 * (1.0 + source.nc_rate)
    u = rng.standard_normal(size)
    v = rng.standard_normal(size)
    base = np.sqrt(mix) * u + 1j * np.sqrt(1.0 - mix) * v
    return np.exp(0.5j * source.nc_phase) * base


def synthesize_rays(
    scenario: Scenario,
    rays_per_source: int = 100,
    rng: np.random.Generator | None = None,
    snapshots: int | None = None,
) -> np.ndarray:
    """Snapshot matrix (L x N) from a superposition of random rays.

    Per snapshot and source, ``rays_per_source`` angles are drawn i.i.d.
    from the angular density and paired with independent complex gains of
    variance power/rays, then summed over the steering vectors; circular
    white noise is added last.  Angles and gains are independent across
    rays and snapshots.
    """
    if rays_per_source < 1:
        raise InvalidSpecError("need at least one ray per source")
    rng = np.random.default_rng(rng)
    n_total = scenario.snapshots if snapshots is None else int(snapshots)
    L = scenario.sensor_count
    X = np.zeros((L, n_total), dtype=complex)
    # chunk over snapshots to bound the (L, R, chunk) intermediate
    chunk = max(1, min(n_total, 4096))
    for start in range(0, n_total, chunk):
        stop = min(start + chunk, n_total)
        n = stop - start
        for src in scenario.sources:
            angles = draw_angles(
                src.family, src.central_doa, src.spread, (rays_per_source, n), rng
            )
            gains = _ray_gains(src, (rays_per_source, n), rng)
            gains *= np.sqrt(src.power / rays_per_source)
            phases = (
                np.sin(angles)[None, :, :]
                * (scenario.geometry.spacing_over_wavelength * np.arange(L))[
                    :, None, None
                ]
            )
            X[:, start:stop] += np.einsum(
                "lrn,rn->ln", np.exp(2j * np.pi * phases), gains
            )
        if scenario.noise_variance > 0:
            w = rng.standard_normal((L, n)) + 1j * rng.standard_normal((L, n))
            X[:, start:stop] += np.sqrt(scenario.noise_variance / 2.0) * w
    return X


def composite_real_covariance(Rxx: np.ndarray, Rpxx: np.ndarray) -> np.ndarray:
    """Covariance of [Re x; Im x] implied by the conjugated/unconjugated pair."""
    top = np.hstack([np.real(Rxx + Rpxx), -np.imag(Rxx - Rpxx)])
    bot = np.hstack([np.imag(Rxx + Rpxx), np.real(Rxx - Rpxx)])
    C = 0.5 * np.vstack([top, bot])
    return 0.5 * (C + C.T)


def synthesize_gaussian(
    Rxx: np.ndarray,
    Rpxx: np.ndarray,
    snapshots: int,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """i.i.d. complex Gaussian snapshots with E{xx^H} = Rxx, E{xx^T} = Rpxx."""
    rng = np.random.default_rng(rng)
    L = Rxx.shape[0]
    C = composite_real_covariance(np.asarray(Rxx), np.asarray(Rpxx))
    w, V = np.linalg.eigh(C)
    scale = max(w.max(), 0.0)
    tol = 1e-10 * scale
    if w.min() < -tol:
        raise NotPsdError(
            f"covariance pair is not PSD (min eigenvalue {w.min():.3e})"
        )
    w = np.clip(w, 0.0, None)
    S = V * np.sqrt(w)
    y = S @ rng.standard_normal((2 * L, snapshots))
    return y[:L] + 1j * y[L:]
