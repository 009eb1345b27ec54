"""Angular parameter estimators built on the inverse-square blocks.

Two search strategies over the compressed cost Re{z1} - |z2|:

* a 2-D grid over (central DOA, spread), which needs the angular family
  to build the spread factors; and
* the decoupled robust version: a 1-D DOA profile obtained by minimizing
  over an auxiliary monotone vector z (Toeplitz/Hankel surrogates for the
  spread factors, so no family knowledge is needed), followed by a 1-D
  spread search per found DOA.

The inner z-minimization runs projected gradient descent with an
isotonic (pool-adjacent-violators) projection onto the monotone box
1 >= z_1 >= ... >= z_n >= 0; the modulus term's nonsmoothness is handled
by resolving its phase at the current iterate, which reduces to the
two-sign rule when the trace is real.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import hankel, toeplitz

from . import kernels
from .arrays import UniformLinearArray, steering_vector
from .covariance import InvSquareBlocks, build_T, build_Tprime
from .errors import (
    BoundaryMinimumWarning,
    InfeasibleAuxiliaryError,
    InsufficientMinimaError,
    NonSeparableGeometryError,
    UndefinedPhaseError,
)
from .sources import AngularFamily

__all__ = [
    "InnerSolverConfig",
    "SearchConfig",
    "EstimationResult",
    "cost_fc",
    "phase_estimate",
    "cost_g",
    "inner_minimize_z",
    "default_z_init",
    "estimate_doas_robust",
    "estimate_spread",
    "estimate_2d",
    "estimate",
]

_DEG = np.pi / 180.0


def _family_code(family) -> int:
    family = AngularFamily.coerce(family)
    return (
        kernels.GAUSSIAN_CODE
        if family is AngularFamily.GAUSSIAN
        else kernels.UNIFORM_CODE
    )


@dataclass(frozen=True)
class InnerSolverConfig:
    max_iters: int = 300
    stationarity_tol: float = 1e-6
    feasibility_tol: float = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    """Grids are (min, max, step) triples in radians."""

    source_count: int
    theta_grid: tuple = (-60.0 * _DEG, 60.0 * _DEG, 0.5 * _DEG)
    sigma_grid: tuple = (0.1 * _DEG, 8.0 * _DEG, 0.1 * _DEG)
    min_separation: float = 2.0 * _DEG
    inner: InnerSolverConfig = field(default_factory=InnerSolverConfig)

    def __post_init__(self):
        if self.source_count < 1:
            raise ValueError("source_count must be >= 1")
        for lo, hi, step in (self.theta_grid, self.sigma_grid):
            if not (step > 0 and lo < hi):
                raise ValueError("grid must satisfy min < max and step > 0")

    def theta_values(self) -> np.ndarray:
        return _grid_values(self.theta_grid)

    def sigma_values(self) -> np.ndarray:
        return _grid_values(self.sigma_grid)


def _grid_values(grid) -> np.ndarray:
    lo, hi, step = grid
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, lo + (n - 1) * step, n)


@dataclass
class EstimationResult:
    """Per-source estimates (sorted by DOA) plus search diagnostics."""

    doas: np.ndarray
    spreads: np.ndarray
    phases: np.ndarray
    diagnostics: dict


def _reduction_mats(blocks: InvSquareBlocks, geom, theta: float):
    a = steering_vector(geom, theta)
    U1 = a[:, None] * np.conj(a)[None, :] * blocks.R1.T
    U2 = a[:, None] * a[None, :] * np.conj(blocks.R2)
    return U1, U2


def cost_fc(theta, sigma, family, blocks: InvSquareBlocks, geom) -> float:
    """Compressed cost at one (DOA, spread) point for a known family."""
    T = build_T(family, theta, sigma, geom)
    Tp = build_Tprime(family, theta, sigma, geom)
    A = T @ T + Tp @ Tp
    B = T @ Tp + Tp @ T
    U1, U2 = _reduction_mats(blocks, geom, theta)
    z1 = np.sum(A * U1)
    z2 = np.sum(B * U2)
    return float(z1.real - abs(z2))


def _z2_trace(theta, sigma, family, blocks, geom) -> complex:
    T = build_T(family, theta, sigma, geom)
    Tp = build_Tprime(family, theta, sigma, geom)
    B = T @ Tp + Tp @ T
    _, U2 = _reduction_mats(blocks, geom, theta)
    return complex(np.sum(B * U2))


def phase_estimate(theta, sigma, family, blocks: InvSquareBlocks, geom) -> float:
    """Noncircularity phase pi - angle(z2), wrapped to (-pi, pi]."""
    z2 = _z2_trace(theta, sigma, family, blocks, geom)
    if abs(z2) <= 1e-14 * np.linalg.norm(blocks.R2, "fro"):
        raise UndefinedPhaseError(
            "unconjugated trace is numerically zero (circular data)"
        )
    return float(np.angle(np.exp(1j * (np.pi - np.angle(z2)))))


def _check_feasible(z, tol):
    z = np.asarray(z, dtype=float)
    ok = (
        z[0] <= 1.0 + tol
        and z[-1] >= -tol
        and np.all(np.diff(z) <= tol)
    )
    if not ok:
        raise InfeasibleAuxiliaryError(
            "auxiliary vector must satisfy 1 >= z_1 >= ... >= z_n >= 0"
        )
    return z


def _zmats(z, L):
    col = np.concatenate(([1.0], z[: L - 1]))
    Z = toeplitz(col)
    Zp = hankel(col, z[L - 2 :])
    return Z, Zp


def cost_g(theta, z, blocks: InvSquareBlocks, geom, feasibility_tol=1e-9) -> float:
    """Structure-constrained cost with Toeplitz/Hankel surrogates from z."""
    L = geom.sensor_count
    z = _check_feasible(z, feasibility_tol)
    if z.shape[0] != 2 * L - 2:
        raise InfeasibleAuxiliaryError(f"auxiliary vector must have length {2*L - 2}")
    Z, Zp = _zmats(z, L)
    A = Z @ Z + Zp @ Zp
    B = Z @ Zp + Zp @ Z
    U1, U2 = _reduction_mats(blocks, geom, theta)
    return float(np.sum(A * U1).real - abs(np.sum(B * U2)))


def default_z_init(geom, theta: float, sigma0: float = 1.0 * _DEG) -> np.ndarray:
    """Feasible warm start: cosine transforms of a small Gaussian spread."""
    g = geom.phase_rate(theta)
    m = np.arange(1, 2 * geom.sensor_count - 1)
    return np.exp(-2.0 * (np.pi * m * g * sigma0) ** 2)


def _require_separable(geom):
    if not getattr(geom, "separable", False):
        raise NonSeparableGeometryError(
            "robust stage needs f'_l = l * g(theta); use a uniform linear array"
        )


def _scaled_blocks(blocks):
    scale = float(np.linalg.norm(blocks.R1, "fro"))
    if scale == 0:
        scale = 1.0
    R1 = np.ascontiguousarray(blocks.R1 / scale, dtype=np.complex128)
    R2 = np.ascontiguousarray(blocks.R2 / scale, dtype=np.complex128)
    return R1, R2, scale


def inner_minimize_z(
    theta: float,
    blocks: InvSquareBlocks,
    geom,
    solver: InnerSolverConfig = InnerSolverConfig(),
    z_init: Optional[np.ndarray] = None,
):
    """Minimize cost_g over feasible z at a fixed DOA.

    Returns ``(z, cost, iterations, converged)``; non-convergence within
    the iteration budget is flagged, never raised, and the returned cost
    never exceeds the cost at ``z_init``.
    """
    _require_separable(geom)
    if z_init is None:
        z_init = default_z_init(geom, theta)
    z_init = _check_feasible(z_init, solver.feasibility_tol)
    R1, R2, scale = _scaled_blocks(blocks)
    costs, zstar, iters, conv = kernels.profile_theta(
        np.array([theta], dtype=float),
        geom.spacing_over_wavelength,
        R1,
        R2,
        np.asarray(z_init, dtype=float)[None, :],
        solver.max_iters,
        solver.stationarity_tol,
    )
    return zstar[0], float(costs[0] * scale), int(iters[0]), bool(conv[0])


def _parabolic_refine(x, y, i, step):
    denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
    if denom <= 0:
        return x[i]
    delta = 0.5 * (y[i - 1] - y[i + 1]) / denom
    return x[i] + np.clip(delta, -0.5, 0.5) * step


def _pick_local_minima(grid, values, count, min_separation):
    """Indices of the ``count`` deepest strict local minima, greedily
    subject to pairwise separation; ties broken toward smaller angle."""
    inner = np.arange(1, grid.size - 1)
    is_min = (values[inner] < values[inner - 1]) & (values[inner] < values[inner + 1])
    cand = inner[is_min]
    order = np.lexsort((grid[cand], values[cand]))
    chosen = []
    for idx in cand[order]:
        if all(abs(grid[idx] - grid[j]) >= min_separation for j in chosen):
            chosen.append(idx)
        if len(chosen) == count:
            break
    return chosen


def estimate_doas_robust(blocks: InvSquareBlocks, geom, cfg: SearchConfig):
    """Stage 1: the K deepest minima of the z-minimized DOA profile.

    Returns ``(doas, diagnostics)`` with DOAs refined by parabolic
    interpolation; raises InsufficientMinimaError (carrying what was
    found) when the profile has fewer usable minima than sources.
    """
    _require_separable(geom)
    thetas = cfg.theta_values()
    z_init = np.stack([default_z_init(geom, th) for th in thetas])
    R1, R2, scale = _scaled_blocks(blocks)
    costs, zstar, iters, conv = kernels.profile_theta(
        thetas,
        geom.spacing_over_wavelength,
        R1,
        R2,
        z_init,
        cfg.inner.max_iters,
        cfg.inner.stationarity_tol,
    )
    profile = costs * scale
    diagnostics = {
        "theta_grid": thetas,
        "profile": profile,
        "inner_iters": iters,
        "inner_converged": conv,
        "z_star": zstar,
    }
    step = cfg.theta_grid[2]
    chosen = _pick_local_minima(thetas, profile, cfg.source_count, cfg.min_separation)
    doas = np.array(
        sorted(_parabolic_refine(thetas, profile, i, step) for i in chosen)
    )
    if len(chosen) < cfg.source_count:
        raise InsufficientMinimaError(
            f"found {len(chosen)} profile minima, need {cfg.source_count}",
            found=doas,
        )
    return doas, diagnostics


def estimate_spread(
    doa: float,
    family,
    blocks: InvSquareBlocks,
    geom,
    cfg: SearchConfig,
):
    """Stage 2: 1-D spread search of the compressed cost at a fixed DOA.

    Returns ``(spread, at_boundary)``; a boundary minimum is refined no
    further and reported with a BoundaryMinimumWarning.
    """
    sigmas = cfg.sigma_values()
    R1, R2, scale = _scaled_blocks(blocks)
    curve = kernels.fc_grid(
        np.array([doa], dtype=float),
        sigmas,
        _family_code(family),
        geom.spacing_over_wavelength,
        R1,
        R2,
    )[0]
    j = int(np.argmin(curve))
    if j == 0 or j == sigmas.size - 1:
        warnings.warn(
            f"spread search hit the grid edge at {np.degrees(sigmas[j]):.3g} deg",
            BoundaryMinimumWarning,
        )
        return float(sigmas[j]), True
    return float(_parabolic_refine(sigmas, curve, j, cfg.sigma_grid[2])), False


def estimate_2d(family, blocks: InvSquareBlocks, geom, cfg: SearchConfig):
    """Joint (DOA, spread) search of the compressed cost.

    All sources must share the angular family.  Returns a list of
    (doa, spread) pairs sorted by DOA.
    """
    thetas = cfg.theta_values()
    sigmas = cfg.sigma_values()
    R1, R2, scale = _scaled_blocks(blocks)
    surface = kernels.fc_grid(
        thetas, sigmas, _family_code(family), geom.spacing_over_wavelength, R1, R2
    )
    # strict local minimum along theta; sigma edges count (point sources
    # legitimately pin the spread at the lower grid edge)
    it = np.arange(1, thetas.size - 1)
    is_min = (surface[it] < surface[it - 1]) & (surface[it] < surface[it + 1])
    left = np.roll(surface, 1, axis=1)
    right = np.roll(surface, -1, axis=1)
    left[:, 0] = np.inf
    right[:, -1] = np.inf
    is_min &= (surface[it] < left[it]) & (surface[it] < right[it])
    cand = np.argwhere(is_min)
    cand[:, 0] += 1
    vals = surface[cand[:, 0], cand[:, 1]]
    order = np.lexsort((thetas[cand[:, 0]], vals))
    chosen = []
    for k in order:
        i = cand[k, 0]
        if all(
            abs(thetas[i] - thetas[j]) >= cfg.min_separation for j, _ in chosen
        ):
            chosen.append((i, cand[k, 1]))
        if len(chosen) == cfg.source_count:
            break
    if len(chosen) < cfg.source_count:
        raise InsufficientMinimaError(
            f"found {len(chosen)} surface minima, need {cfg.source_count}",
            found=[
                (thetas[i], sigmas[j]) for i, j in chosen
            ],
        )
    pairs = []
    for i, j in chosen:
        th = _parabolic_refine(thetas, surface[:, j], i, cfg.theta_grid[2])
        if 0 < j < sigmas.size - 1:
            sg = _parabolic_refine(sigmas, surface[i, :], j, cfg.sigma_grid[2])
        else:
            sg = sigmas[j]
        pairs.append((float(th), float(sg)))
    return sorted(pairs)


def estimate(
    blocks: InvSquareBlocks,
    geom,
    cfg: SearchConfig,
    method: str = "robust",
    spread_family=AngularFamily.GAUSSIAN,
) -> EstimationResult:
    """Full pipeline: DOAs, spreads and noncircularity phases.

    ``method`` is "robust" (family-oblivious DOA stage, then per-source
    spread search) or "two_d" (joint grid search; needs the family).
    """
    if method == "robust":
        doas, diagnostics = estimate_doas_robust(blocks, geom, cfg)
        spreads = []
        flags = []
        for doa in doas:
            sg, hit = estimate_spread(doa, spread_family, blocks, geom, cfg)
            spreads.append(sg)
            flags.append(hit)
        diagnostics["spread_boundary"] = flags
        pairs = list(zip(doas, spreads))
    elif method == "two_d":
        pairs = estimate_2d(spread_family, blocks, geom, cfg)
        diagnostics = {"method": "two_d"}
    else:
        raise ValueError(f"unknown method {method!r}")
    phases = []
    for th, sg in pairs:
        try:
            phases.append(phase_estimate(th, sg, spread_family, blocks, geom))
        except UndefinedPhaseError:
            phases.append(np.nan)
    diagnostics["method"] = method
    return EstimationResult(
        doas=np.array([p[0] for p in pairs]),
        spreads=np.array([p[1] for p in pairs]),
        phases=np.array(phases),
        diagnostics=diagnostics,
    )
