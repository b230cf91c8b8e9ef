"""Marginal posterior surfaces over the jurisdiction grid.

For each candidate anchor cell z the engine evaluates

    mass(z)  proportional to  h(z) * sum_j w_j * prod_i p(x_i | z, theta_j)

where the theta_j are parameter nodes placed at equal-probability
quantiles of the parameter priors (midpoint rule, weight 1/m each, tensor
product across a family's parameters) and h is the anchor prior. Products
over crimes run in log space with a per-cell max shift before
exponentiation, so series of 30+ crimes cannot underflow.

Every family's log-likelihood sum over crimes depends on the cell only
through a handful of per-cell statistics (sums of radii, squared radii,
bearings, squared bearings), which keeps the node sweep a dense array
operation instead of a per-cell loop. For the distance-and-bearing family
the tensor sum over (distance nodes) x (bearing nodes) factorizes exactly
into the product of the two block sums, and is computed that way.

Method wiring: the *a* methods model buffer-zone residents with the ring
family, the *b* methods with the distance-and-bearing family under the
resident ring priors; the 2* methods blend the resident surface with a
non-resident surface at fixed weights.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from geoprofile.classify import SubtypeKind, SubtypeLabel
from geoprofile.dataset import CrimeSeries
from geoprofile.grid import Grid, OutOfGridError, cell_center, locate_cell
from geoprofile.models import (
    TWO_PI,
    angle_normalizer,
    radial_normalizer,
    ring_normal_normalizer,
)
from geoprofile.priors import PriorKind, PriorSet

__all__ = [
    "Family",
    "MethodId",
    "ModelSpec",
    "PosteriorSurface",
    "DegenerateSurfaceError",
    "Grid",
    "OutOfGridError",
    "cell_center",
    "locate_cell",
    "posterior_surface",
    "multimodel_combine",
    "m3_surface",
    "run_method",
    "method_surfaces",
    "NONRES_WEIGHT_FROM_FREQUENCIES",
]

# offenders far from home are one in eleven of the study population; the
# frequency-weighted methods use that split
NONRES_WEIGHT_FROM_FREQUENCIES = 1.0 / 11.0

ANCHOR_COINCIDENCE_KM = 1e-12
ANCHOR_NUDGE_KM = 1e-6


class Family(enum.Enum):
    M1 = "M1"
    M2 = "M2"
    NONRES = "NONRES"


class MethodId(enum.Enum):
    ONE_A = "1a"
    ONE_B = "1b"
    TWO_AI = "2ai"
    TWO_AII = "2aii"
    TWO_BI = "2bi"
    TWO_BII = "2bii"
    ROSSMO = "rossmo"


FAMILY_PARAMS: dict[Family, tuple[str, ...]] = {
    Family.M1: ("alpha",),
    Family.M2: ("alpha", "sigma"),
    Family.NONRES: ("alpha", "sigma1", "theta", "sigma2"),
}

DEFAULT_NODE_COUNTS = {
    "alpha": 32,
    "theta": 32,
    "sigma": 8,
    "sigma1": 8,
    "sigma2": 8,
}

DEFAULT_PRIOR_KINDS: dict[Family, dict[str, PriorKind]] = {
    Family.M1: {"alpha": PriorKind.DISTANCE_M1},
    Family.M2: {"alpha": PriorKind.DISTANCE_M2, "sigma": PriorKind.SPREAD_RADIAL},
    Family.NONRES: {
        "alpha": PriorKind.DISTANCE_NONRES,
        "sigma1": PriorKind.SPREAD_RADIAL,
        "theta": PriorKind.ANGLE_NONRES,
        "sigma2": PriorKind.SPREAD_ANGULAR,
    },
}

# buffer-zone residents modelled with the distance-and-bearing family keep
# their resident travel/bearing priors
RESIDENT_RING_PRIOR_KINDS = {
    "alpha": PriorKind.DISTANCE_M2,
    "sigma1": PriorKind.SPREAD_RADIAL,
    "theta": PriorKind.ANGLE_M2,
    "sigma2": PriorKind.SPREAD_ANGULAR,
}


class DegenerateSurfaceError(RuntimeError):
    """Every cell underflowed; the posterior carries no information."""


@dataclass(frozen=True)
class ModelSpec:
    """Likelihood family plus its parameter-quadrature configuration."""

    family: Family
    quadrature: Mapping[str, int] | None = None
    fixed_overrides: Mapping[str, float] | None = None
    prior_kinds: Mapping[str, PriorKind] | None = None

    def node_count(self, param: str) -> int:
        if self.quadrature and param in self.quadrature:
            count = int(self.quadrature[param])
            if count < 1:
                raise ValueError(f"node count for {param} must be >= 1")
            return count
        return DEFAULT_NODE_COUNTS[param]

    def prior_kind(self, param: str) -> PriorKind:
        if self.prior_kinds and param in self.prior_kinds:
            return self.prior_kinds[param]
        return DEFAULT_PRIOR_KINDS[self.family][param]


@dataclass(frozen=True, eq=False)
class PosteriorSurface:
    """Normalized probability mass over grid cells, row 0 at the south edge."""

    grid: Grid
    mass: np.ndarray

    def __post_init__(self) -> None:
        if self.mass.shape != (self.grid.nrows, self.grid.ncols):
            raise ValueError("mass must be shaped (nrows, ncols)")
        if not np.all(np.isfinite(self.mass)) or np.any(self.mass < 0.0):
            raise ValueError("mass must be finite and nonnegative")
        if abs(float(self.mass.sum()) - 1.0) > 1e-9:
            raise ValueError(f"mass must sum to 1, got {self.mass.sum()}")


def _quadrature_nodes(spec: ModelSpec, param: str, priors: PriorSet) -> np.ndarray:
    override = (spec.fixed_overrides or {}).get(param)
    prior = priors[spec.prior_kind(param)]
    if override is not None:
        if not prior.lo <= override <= prior.hi:
            raise ValueError(
                f"fixed {param}={override} outside prior support "
                f"[{prior.lo}, {prior.hi}]"
            )
        nodes = np.array([float(override)])
    else:
        m = spec.node_count(param)
        nodes = np.asarray(prior.quantile((np.arange(m) + 0.5) / m), dtype=float)
    if param != "theta":
        # distances and spreads must stay strictly positive for the
        # normalizers even when a prior's support touches zero
        nodes = np.maximum(nodes, 1e-9)
    return nodes


def _radial_stats(xy: np.ndarray, centers: np.ndarray):
    """Per-cell radius sums; bearings for sites not on the cell center.

    A crime site exactly on a candidate anchor has no bearing; it is
    treated as sitting a nominal 1e-6 km away in the preferred direction,
    which zeroes its bearing residual for every bearing node.
    """
    d = centers[:, None, :] - xy[None, :, :]
    r = np.sqrt(np.sum(d * d, axis=-1))
    degenerate = r < ANCHOR_COINCIDENCE_KM
    r_eff = np.where(degenerate, ANCHOR_NUDGE_KM, r)
    phi = np.arctan2(-d[..., 1], -d[..., 0]) % TWO_PI
    phi = np.where(phi >= TWO_PI, 0.0, phi)
    valid = ~degenerate
    return r_eff, phi, valid


def _log_quad_m1(sum_r2: np.ndarray, n: int, alpha: np.ndarray) -> np.ndarray:
    a2 = alpha[None, :] ** 2
    s = -n * np.log(4.0 * a2) - (math.pi / (4.0 * a2)) * sum_r2[:, None]
    return logsumexp(s, axis=1) - math.log(len(alpha))


def _log_quad_radial(
    sum_r: np.ndarray,
    sum_r2: np.ndarray,
    n: int,
    alpha: np.ndarray,
    sigma: np.ndarray,
    normalizer,
) -> np.ndarray:
    a, s = np.meshgrid(alpha, sigma, indexing="ij")
    a, s = a.ravel()[None, :], s.ravel()[None, :]
    log_norm = n * np.log(normalizer(a, s))
    resid = sum_r2[:, None] - 2.0 * a * sum_r[:, None] + n * a * a
    vals = -resid / (2.0 * s * s) - log_norm
    return logsumexp(vals, axis=1) - math.log(vals.shape[1])


def _log_quad_angular(
    sum_phi: np.ndarray,
    sum_phi2: np.ndarray,
    n_valid: np.ndarray,
    n_total: int,
    theta: np.ndarray,
    sigma2: np.ndarray,
) -> np.ndarray:
    t, s = np.meshgrid(theta, sigma2, indexing="ij")
    t, s = t.ravel()[None, :], s.ravel()[None, :]
    log_norm = n_total * np.log(angle_normalizer(t, s))
    resid = sum_phi2[:, None] - 2.0 * t * sum_phi[:, None] + n_valid[:, None] * t * t
    vals = -resid / (2.0 * s * s) - log_norm
    return logsumexp(vals, axis=1) - math.log(vals.shape[1])


def _log_marginal_likelihood(
    series: CrimeSeries, spec: ModelSpec, priors: PriorSet, grid: Grid
) -> np.ndarray:
    """log of the quadrature sum per cell, flattened row-major."""
    xy = series.xy
    n = len(xy)
    r, phi, valid = _radial_stats(xy, grid.centers)
    sum_r = r.sum(axis=1)
    sum_r2 = (r * r).sum(axis=1)

    if spec.family is Family.M1:
        return _log_quad_m1(sum_r2, n, _quadrature_nodes(spec, "alpha", priors))

    if spec.family is Family.M2:
        return _log_quad_radial(
            sum_r,
            sum_r2,
            n,
            _quadrature_nodes(spec, "alpha", priors),
            _quadrature_nodes(spec, "sigma", priors),
            ring_normal_normalizer,
        )

    radial = _log_quad_radial(
        sum_r,
        sum_r2,
        n,
        _quadrature_nodes(spec, "alpha", priors),
        _quadrature_nodes(spec, "sigma1", priors),
        radial_normalizer,
    )
    angular = _log_quad_angular(
        (phi * valid).sum(axis=1),
        (phi * phi * valid).sum(axis=1),
        valid.sum(axis=1),
        n,
        _quadrature_nodes(spec, "theta", priors),
        _quadrature_nodes(spec, "sigma2", priors),
    )
    return radial + angular


def _normalize_log_mass(log_mass: np.ndarray, grid: Grid) -> PosteriorSurface:
    peak = float(np.max(log_mass))
    if not math.isfinite(peak):
        raise DegenerateSurfaceError(
            "posterior underflowed in every cell; surface carries no information"
        )
    mass = np.exp(log_mass - peak)
    mass /= mass.sum()  # fixed row-major reduction order
    return PosteriorSurface(grid, mass.reshape(grid.nrows, grid.ncols))


def posterior_surface(
    series: CrimeSeries, spec: ModelSpec, priors: PriorSet, grid: Grid
) -> PosteriorSurface:
    """Marginal anchor posterior for one series under one model family."""
    if priors.anchor.grid != grid:
        raise ValueError("anchor prior grid does not match the target grid")
    log_mass = _log_marginal_likelihood(series, spec, priors, grid)
    return _normalize_log_mass(log_mass + priors.anchor.log_weights, grid)


def multimodel_combine(
    surfaces: Sequence[PosteriorSurface], weights: Sequence[float]
) -> PosteriorSurface:
    """Cellwise convex combination of posterior surfaces."""
    if not surfaces:
        raise ValueError("need at least one surface")
    if len(weights) != len(surfaces):
        raise ValueError("one weight per surface required")
    weights = [float(w) for w in weights]
    if any(w < 0.0 for w in weights):
        raise ValueError("weights must be nonnegative")
    if abs(sum(weights) - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1, got {sum(weights)}")
    grid = surfaces[0].grid
    for s in surfaces[1:]:
        if s.grid != grid:
            raise ValueError("surfaces must share one grid")
    mass = np.zeros_like(surfaces[0].mass)
    for w, s in zip(weights, surfaces):
        mass += w * s.mass
    return PosteriorSurface(grid, mass)


def m3_surface(
    series: CrimeSeries,
    label: SubtypeLabel,
    priors: PriorSet,
    grid: Grid,
    cluster_weights: Sequence[float] | None = None,
    variant: str = "a",
    quadrature: Mapping[str, int] | None = None,
) -> PosteriorSurface:
    """Clustered residents: one no-buffer model per cluster plus one buffer model.

    Each cluster contributes a no-buffer surface whose evidence is just
    that cluster's sites; the buffer surface sees all sites. Weights
    default to uniform over the R component models.
    """
    if label.kind is not SubtypeKind.M3:
        raise ValueError("m3_surface requires an M3 label with clusters")
    components = [
        posterior_surface(
            series.restrict(cluster),
            ModelSpec(Family.M1, quadrature=quadrature),
            priors,
            grid,
        )
        for cluster in label.clusters
    ]
    components.append(
        posterior_surface(series, _buffer_spec(variant, quadrature), priors, grid)
    )
    if cluster_weights is None:
        cluster_weights = [1.0 / len(components)] * len(components)
    return multimodel_combine(components, cluster_weights)


def _buffer_spec(variant: str, quadrature: Mapping[str, int] | None = None) -> ModelSpec:
    if variant == "a":
        return ModelSpec(Family.M2, quadrature=quadrature)
    if variant == "b":
        return ModelSpec(
            Family.NONRES,
            quadrature=quadrature,
            prior_kinds=RESIDENT_RING_PRIOR_KINDS,
        )
    raise ValueError(f"unknown method variant {variant!r}")


def _resident_surface(
    series: CrimeSeries,
    label: SubtypeLabel,
    priors: PriorSet,
    grid: Grid,
    variant: str,
    quadrature: Mapping[str, int] | None = None,
) -> PosteriorSurface:
    if label.kind is SubtypeKind.M1:
        return posterior_surface(
            series, ModelSpec(Family.M1, quadrature=quadrature), priors, grid
        )
    if label.kind is SubtypeKind.M2:
        return posterior_surface(series, _buffer_spec(variant, quadrature), priors, grid)
    return m3_surface(series, label, priors, grid, variant=variant, quadrature=quadrature)


_VARIANTS = {
    MethodId.ONE_A: "a",
    MethodId.ONE_B: "b",
    MethodId.TWO_AI: "a",
    MethodId.TWO_AII: "a",
    MethodId.TWO_BI: "b",
    MethodId.TWO_BII: "b",
}
_RESIDENTS_ONLY_METHODS = {MethodId.ONE_A, MethodId.ONE_B}
_EQUAL_WEIGHT_METHODS = {MethodId.TWO_AI, MethodId.TWO_BI}


def method_surfaces(
    series: CrimeSeries,
    methods: Sequence[MethodId],
    label: SubtypeLabel,
    priors: PriorSet,
    grid: Grid,
    nonres_weight: float = NONRES_WEIGHT_FROM_FREQUENCIES,
    quadrature: Mapping[str, int] | None = None,
) -> dict[MethodId, PosteriorSurface]:
    """Surfaces for several methods at once, sharing component posteriors."""
    if MethodId.ROSSMO in methods:
        raise ValueError("the hit-score baseline is not a posterior method")
    resident: dict[str, PosteriorSurface] = {}
    for method in methods:
        variant = _VARIANTS[method]
        if variant not in resident:
            resident[variant] = _resident_surface(
                series, label, priors, grid, variant, quadrature
            )
    nonres = None
    if any(m not in _RESIDENTS_ONLY_METHODS for m in methods):
        nonres = posterior_surface(
            series, ModelSpec(Family.NONRES, quadrature=quadrature), priors, grid
        )

    out = {}
    for method in methods:
        base = resident[_VARIANTS[method]]
        if method in _RESIDENTS_ONLY_METHODS:
            out[method] = base
        else:
            w_nonres = 0.5 if method in _EQUAL_WEIGHT_METHODS else nonres_weight
            out[method] = multimodel_combine(
                [base, nonres], [1.0 - w_nonres, w_nonres]
            )
    return out


def run_method(
    series: CrimeSeries,
    method: MethodId,
    label: SubtypeLabel,
    priors: PriorSet,
    grid: Grid,
    nonres_weight: float = NONRES_WEIGHT_FROM_FREQUENCIES,
    quadrature: Mapping[str, int] | None = None,
) -> PosteriorSurface:
    """Posterior surface for one series under one method's wiring."""
    return method_surfaces(
        series, [method], label, priors, grid, nonres_weight, quadrature
    )[method]
