"""Offender subtype classification from crime-site geometry alone.

Residents split into three behavioural subtypes: tight single-area
offenders (no buffer zone), spread-out irregular offenders (buffer zone),
and offenders whose sites form several distinct clusters. The rules below
use only pairwise distances between crime sites; the anchor point is
unknown at classification time, so residency itself is not decided here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from geoprofile.geodesy import UtmPoint

__all__ = [
    "SubtypeKind",
    "SubtypeLabel",
    "nn_distances",
    "detect_clusters",
    "classify",
]

NN_THRESHOLD_KM = 2.0
CLUSTER_CUTOFF_KM = 2.0
SINGLE_CLUSTER_COVERAGE = 0.8
MULTI_CLUSTER_COVERAGE = 0.6


class SubtypeKind(enum.Enum):
    M1 = "M1"
    M2 = "M2"
    M3 = "M3"


@dataclass(frozen=True)
class SubtypeLabel:
    kind: SubtypeKind
    clusters: tuple[frozenset[int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if (self.kind is SubtypeKind.M3) != bool(self.clusters):
            raise ValueError("clusters must be nonempty exactly for M3 labels")
        seen: set[int] = set()
        for cluster in self.clusters:
            if len(cluster) < 2:
                raise ValueError("every cluster needs at least 2 sites")
            if seen & cluster:
                raise ValueError("clusters must be disjoint")
            seen |= cluster


def as_xy(sites) -> np.ndarray:
    """Coerce a site sequence (UtmPoint or coordinate pairs) to an (n, 2) array."""
    if len(sites) and isinstance(sites[0], UtmPoint):
        return np.array([(s.easting, s.northing) for s in sites], dtype=float)
    out = np.asarray(sites, dtype=float)
    if out.ndim != 2 or out.shape[1] != 2:
        raise ValueError(f"expected (n, 2) site coordinates, got shape {out.shape}")
    return out


def _pairwise(xy: np.ndarray, metric: str) -> np.ndarray:
    diff = xy[:, None, :] - xy[None, :, :]
    if metric == "euclidean":
        return np.sqrt((diff**2).sum(axis=-1))
    if metric == "manhattan":
        return np.abs(diff).sum(axis=-1)
    raise ValueError(f"unknown metric {metric!r}")


def nn_distances(sites, metric: str = "euclidean") -> np.ndarray:
    """Distance from each site to its nearest other site."""
    xy = as_xy(sites)
    if len(xy) < 2:
        raise ValueError("need at least 2 sites for nearest-neighbour distances")
    d = _pairwise(xy, metric)
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def detect_clusters(sites, cutoff: float = CLUSTER_CUTOFF_KM) -> list[frozenset[int]]:
    """Single-linkage components at the cutoff; isolated sites are not clusters.

    Components are connected components of the graph with an edge wherever
    two sites are within ``cutoff`` of each other, so chains link up.
    Returned in order of each component's smallest site index.
    """
    xy = as_xy(sites)
    if len(xy) < 2:
        raise ValueError("need at least 2 sites to detect clusters")
    if cutoff <= 0.0:
        raise ValueError("cutoff must be > 0")
    n = len(xy)
    adjacent = _pairwise(xy, "euclidean") <= cutoff
    labels = np.full(n, -1, dtype=int)
    n_comp = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = n_comp
        while stack:
            i = stack.pop()
            for j in np.nonzero(adjacent[i] & (labels < 0))[0]:
                labels[j] = n_comp
                stack.append(j)
        n_comp += 1
    clusters = []
    for comp in range(n_comp):
        members = frozenset(np.nonzero(labels == comp)[0].tolist())
        if len(members) >= 2:
            clusters.append(members)
    return clusters


def classify(
    sites,
    *,
    nn_threshold_km: float = NN_THRESHOLD_KM,
    cluster_cutoff_km: float = CLUSTER_CUTOFF_KM,
    single_cluster_coverage: float = SINGLE_CLUSTER_COVERAGE,
    multi_cluster_coverage: float = MULTI_CLUSTER_COVERAGE,
) -> SubtypeLabel:
    """Assign a subtype from site geometry.

    Tight offenders (median nearest-neighbour distance within the
    threshold, essentially one cluster) have no buffer zone. Several
    clusters covering most sites mean cluster-wise modelling. Everything
    else gets the buffer-zone subtype. The median is used rather than the
    mean so one far-flung site cannot flip the label.
    """
    xy = as_xy(sites)
    if len(xy) < 3:
        raise ValueError("need at least 3 sites to classify")
    clusters = detect_clusters(xy, cluster_cutoff_km)
    coverage = sum(len(c) for c in clusters) / len(xy)
    if (
        float(np.median(nn_distances(xy))) <= nn_threshold_km
        and len(clusters) == 1
        and len(clusters[0]) / len(xy) >= single_cluster_coverage
    ):
        return SubtypeLabel(SubtypeKind.M1)
    if len(clusters) >= 2 and coverage >= multi_cluster_coverage:
        return SubtypeLabel(SubtypeKind.M3, tuple(clusters))
    return SubtypeLabel(SubtypeKind.M2)
