"""Array geometries and steering vectors.

Sensor ``l`` (zero-based) responds to a unit plane wave from direction
``theta`` with ``exp(j * 2 * pi * f_l(theta))``.  For the uniform linear
array ``f_l(theta) = l * spacing * sin(theta)`` with the spacing measured
in wavelengths, so the phase-rate factors as ``f'_l = l * g(theta)`` with
``g(theta) = spacing * cos(theta)``.  The robust DOA stage relies on that
separable form and rejects geometries that do not provide it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidSpecError, NonSeparableGeometryError

__all__ = [
    "UniformLinearArray",
    "TabulatedPlanarArray",
    "steering_vector",
    "extended_steering",
    "phase_rate",
    "steering_derivative",
]


@dataclass(frozen=True)
class UniformLinearArray:
    """Equally spaced sensors on a line; spacing in wavelengths."""

    sensor_count: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        if self.sensor_count < 2:
            raise InvalidSpecError("need at least 2 sensors")
        if self.spacing_over_wavelength <= 0:
            raise InvalidSpecError("spacing must be positive")

    @property
    def separable(self) -> bool:
        return True

    def phase_frac(self, theta: float) -> np.ndarray:
        """f_l(theta), l = 0..L-1."""
        return np.arange(self.sensor_count) * (
            self.spacing_over_wavelength * np.sin(theta)
        )

    def phase_frac_rate(self, theta: float) -> np.ndarray:
        """f'_l(theta) = l * g(theta)."""
        return np.arange(self.sensor_count) * self.phase_rate(theta)

    def phase_frac_curv(self, theta: float) -> np.ndarray:
        """f''_l(theta)."""
        return np.arange(self.sensor_count) * (
            -self.spacing_over_wavelength * np.sin(theta)
        )

    def phase_rate(self, theta: float) -> float:
        """g(theta) such that f'_l = l * g."""
        return self.spacing_over_wavelength * np.cos(theta)

    def phase_rate_derivative(self, theta: float) -> float:
        return -self.spacing_over_wavelength * np.sin(theta)

    def phase_rate_curvature(self, theta: float) -> float:
        return -self.spacing_over_wavelength * np.cos(theta)


@dataclass(frozen=True)
class TabulatedPlanarArray:
    """Planar array given by per-sensor phase functions f_l and f'_l.

    ``f`` and ``fprime`` map theta to length-L arrays.  No separable
    phase-rate is assumed, so the robust DOA stage rejects this geometry.
    """

    sensor_count: int
    f: Callable[[float], Sequence[float]]
    fprime: Callable[[float], Sequence[float]]

    @property
    def separable(self) -> bool:
        return False

    def phase_frac(self, theta: float) -> np.ndarray:
        out = np.asarray(self.f(theta), dtype=float)
        if out.shape != (self.sensor_count,):
            raise InvalidSpecError("tabulated f must return one value per sensor")
        return out

    def phase_frac_rate(self, theta: float) -> np.ndarray:
        out = np.asarray(self.fprime(theta), dtype=float)
        if out.shape != (self.sensor_count,):
            raise InvalidSpecError("tabulated f' must return one value per sensor")
        return out

    def phase_rate(self, theta: float) -> float:
        raise NonSeparableGeometryError(
            "tabulated geometry has no common phase-rate g(theta)"
        )


def steering_vector(geom, theta: float) -> np.ndarray:
    """Complex array response a(theta), one unit-modulus entry per sensor."""
    return np.exp(2j * np.pi * geom.phase_frac(theta))


def extended_steering(geom, theta: float, phi: float) -> np.ndarray:
    """Stacked response [a(theta); exp(-j*phi) * conj(a(theta))] of length 2L."""
    a = steering_vector(geom, theta)
    return np.concatenate([a, np.exp(-1j * phi) * np.conj(a)])


def phase_rate(geom, theta: float) -> float:
    """Common phase-rate g(theta); raises for non-separable geometries."""
    return geom.phase_rate(theta)


def steering_derivative(geom, theta: float, order: int = 1) -> np.ndarray:
    """First or second derivative of the steering vector w.r.t. theta."""
    a = steering_vector(geom, theta)
    fp = geom.phase_frac_rate(theta)
    if order == 1:
        return 2j * np.pi * fp * a
    if order == 2:
        fpp = geom.phase_frac_curv(theta)
        return (2j * np.pi * fpp + (2j * np.pi * fp) ** 2) * a
    raise ValueError("order must be 1 or 2")
