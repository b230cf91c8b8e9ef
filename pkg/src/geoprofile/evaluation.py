"""Search-fraction evaluation of anchor-point methods.

Cells are examined in descending posterior order (ties resolved by
row-major index, so results are reproducible); the per-offender score is
the fraction of the jurisdiction explored before reaching the cell that
contains the true anchor. Accumulation curves aggregate those fractions
over a population at fixed exploration thresholds, matching how competing
methods are usually tabulated against each other.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from geoprofile.classify import classify
from geoprofile.dataset import CrimeSeries, Dataset
from geoprofile.engine import (
    MethodId,
    NONRES_WEIGHT_FROM_FREQUENCIES,
    PosteriorSurface,
    method_surfaces,
)
from geoprofile.geodesy import UtmPoint
from geoprofile.grid import Grid, locate_cell
from geoprofile.priors import build_prior_set
from geoprofile.rossmo import hit_score_surface

__all__ = [
    "Scope",
    "SearchResult",
    "AccumulationCurve",
    "FailureRecord",
    "EvaluationReport",
    "RESIDENTS_THRESHOLDS",
    "ALL_THRESHOLDS",
    "is_nonresident",
    "rank_cells",
    "search_fraction",
    "accumulation_curve",
    "compare_methods",
]

logger = logging.getLogger(__name__)

NONRESIDENT_MIN_KM = 10.0

RESIDENTS_THRESHOLDS = tuple(t / 100.0 for t in (*range(1, 11), 16, 17))
ALL_THRESHOLDS = tuple(t / 100.0 for t in (1, 5, 10, 15, 20, 25, 36, 37, 38, 39))


class Scope(enum.Enum):
    RESIDENTS_ONLY = "residents"
    ALL = "all"


@dataclass(frozen=True)
class SearchResult:
    offender_id: str
    method: MethodId
    cells_examined: int
    fraction: float

    def __post_init__(self) -> None:
        if self.cells_examined < 1:
            raise ValueError("cells_examined is 1-based")
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError("fraction must be in (0, 1]")


@dataclass(frozen=True)
class AccumulationCurve:
    method: MethodId
    thresholds: tuple[float, ...]
    found_fraction: tuple[float, ...]


@dataclass(frozen=True)
class FailureRecord:
    offender_id: str
    method: str
    message: str


def is_nonresident(series: CrimeSeries, cutoff_km: float = NONRESIDENT_MIN_KM) -> bool:
    """Ground-truth residency: no crime within the cutoff of the anchor.

    Used only for scope selection; estimation never sees the anchor.
    """
    if series.anchor is None:
        raise ValueError("residency needs a known anchor")
    anchor = np.array([series.anchor.easting, series.anchor.northing])
    d = series.xy - anchor
    return bool(np.hypot(d[:, 0], d[:, 1]).min() > cutoff_km)


def _ranking(surface: PosteriorSurface) -> np.ndarray:
    # stable argsort of the negated mass: ties stay in row-major order
    return np.argsort(-surface.mass.ravel(), kind="stable")


def rank_cells(surface: PosteriorSurface) -> list[tuple[int, int]]:
    """All cells, best first; deterministic under ties."""
    ncols = surface.grid.ncols
    return [divmod(int(k), ncols) for k in _ranking(surface)]


def search_fraction(
    surface: PosteriorSurface,
    anchor: UtmPoint,
    offender_id: str = "",
    method: MethodId = MethodId.ROSSMO,
) -> SearchResult:
    """1-based rank of the anchor's cell in the surface ordering."""
    row, col = locate_cell(surface.grid, anchor)
    target = row * surface.grid.ncols + col
    rank = int(np.nonzero(_ranking(surface) == target)[0][0]) + 1
    return SearchResult(
        offender_id=offender_id,
        method=method,
        cells_examined=rank,
        fraction=rank / surface.grid.ncells,
    )


def accumulation_curve(
    results: Sequence[SearchResult],
    thresholds: Sequence[float],
    method: MethodId = MethodId.ROSSMO,
) -> AccumulationCurve:
    """Fraction of anchors found within each exploration threshold."""
    if not results:
        raise ValueError("need at least one search result")
    if any(not 0.0 < t <= 1.0 for t in thresholds):
        raise ValueError("thresholds must lie in (0, 1]")
    fractions = np.array([r.fraction for r in results])
    found = tuple(float((fractions <= t).mean()) for t in thresholds)
    return AccumulationCurve(
        method=method, thresholds=tuple(float(t) for t in thresholds), found_fraction=found
    )


@dataclass
class EvaluationReport:
    scope: Scope
    thresholds: tuple[float, ...]
    methods: tuple[MethodId, ...]
    results: list[SearchResult] = field(default_factory=list)
    curves: list[AccumulationCurve] = field(default_factory=list)
    failures: list[FailureRecord] = field(default_factory=list)
    subtypes: dict[str, str] = field(default_factory=dict)

    def results_csv(self) -> str:
        lines = ["offender_id,method,subtype,cells_examined,fraction"]
        for r in self.results:
            subtype = self.subtypes.get(r.offender_id, "")
            lines.append(
                f"{r.offender_id},{r.method.value},{subtype},"
                f"{r.cells_examined},{r.fraction!r}"
            )
        return "\n".join(lines) + "\n"

    def curves_csv(self) -> str:
        lines = ["method,threshold,found_fraction"]
        for curve in self.curves:
            for t, f in zip(curve.thresholds, curve.found_fraction):
                lines.append(f"{curve.method.value},{t!r},{f!r}")
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        """Threshold-by-method matrix of found fractions."""
        header = ["explored"] + [f"{t:.0%}" for t in self.thresholds]
        widths = [max(8, len(h)) for h in header]
        rows = [header]
        for curve in self.curves:
            rows.append(
                [curve.method.value] + [f"{f:.4f}" for f in curve.found_fraction]
            )
        out = []
        for row in rows:
            out.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        return "\n".join(out)


def compare_methods(
    ds: Dataset,
    methods: Sequence[MethodId],
    scope: Scope,
    grid: Grid | None = None,
    thresholds: Sequence[float] | None = None,
    nonres_weight: float = NONRES_WEIGHT_FROM_FREQUENCIES,
    classifier_options: dict | None = None,
    quadrature: dict | None = None,
) -> EvaluationReport:
    """Full pipeline over a dataset: classify, leave-one-out priors,
    per-method surfaces, search fractions, accumulation curves.

    Per-offender failures (anchor outside the grid, prior construction,
    engine errors) are recorded and skipped; the run always completes.
    """
    grid = grid or Grid()
    methods = tuple(methods)
    if thresholds is None:
        thresholds = (
            RESIDENTS_THRESHOLDS if scope is Scope.RESIDENTS_ONLY else ALL_THRESHOLDS
        )
    thresholds = tuple(thresholds)
    classifier_options = classifier_options or {}

    labels = {
        s.offender_id: classify(s.xy, **classifier_options) for s in ds.series
    }
    report = EvaluationReport(
        scope=scope,
        thresholds=thresholds,
        methods=methods,
        subtypes={oid: label.kind.value for oid, label in labels.items()},
    )

    bayes_methods = tuple(m for m in methods if m is not MethodId.ROSSMO)
    for series in ds.series:
        oid = series.offender_id
        if series.anchor is None:
            report.failures.append(FailureRecord(oid, "", "no anchor in dataset"))
            continue
        if scope is Scope.RESIDENTS_ONLY and is_nonresident(series):
            continue
        if not grid.contains(series.anchor):
            report.failures.append(
                FailureRecord(oid, "", "anchor outside the jurisdiction grid")
            )
            continue

        surfaces: dict[MethodId, PosteriorSurface] = {}
        if bayes_methods:
            try:
                priors = build_prior_set(ds, oid, labels, grid)
                surfaces = method_surfaces(
                    series,
                    bayes_methods,
                    labels[oid],
                    priors,
                    grid,
                    nonres_weight,
                    quadrature,
                )
            except Exception as exc:
                logger.warning("offender %s: posterior methods failed: %s", oid, exc)
                for m in bayes_methods:
                    report.failures.append(FailureRecord(oid, m.value, str(exc)))
        if MethodId.ROSSMO in methods:
            try:
                surfaces[MethodId.ROSSMO] = hit_score_surface(series, grid)
            except Exception as exc:
                logger.warning("offender %s: hit-score baseline failed: %s", oid, exc)
                report.failures.append(
                    FailureRecord(oid, MethodId.ROSSMO.value, str(exc))
                )

        for m in methods:
            if m in surfaces:
                report.results.append(
                    search_fraction(surfaces[m], series.anchor, oid, m)
                )

    for m in methods:
        method_results = [r for r in report.results if r.method is m]
        if method_results:
            report.curves.append(accumulation_curve(method_results, thresholds, m))
        else:
            logger.warning("method %s produced no results", m.value)
    return report
