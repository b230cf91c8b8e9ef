"""Command-line front end: convert, classify, profile, evaluate, emit-grid.

Configuration is a flat ``key = value`` text file; command-line flags
override file values. All outputs are plain CSV/PGM/JSON and are
byte-identical across reruns with the same configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from geoprofile.classify import classify
from geoprofile.dataset import (
    CSV_HEADER,
    Dataset,
    group_into_series,
    parse_records,
)
from geoprofile.engine import (
    MethodId,
    NONRES_WEIGHT_FROM_FREQUENCIES,
    PosteriorSurface,
    run_method,
)
from geoprofile.evaluation import Scope, compare_methods, rank_cells
from geoprofile.geodesy import latlon_to_utm
from geoprofile.grid import Grid, cell_center
from geoprofile.priors import build_prior_set
from geoprofile.rossmo import hit_score_surface
from geoprofile.synthetic import UTM_CSV_HEADER, parse_utm_csv

__all__ = ["RunConfig", "load_config", "load_dataset", "main"]

DEFAULT_METHODS = (
    MethodId.ONE_A,
    MethodId.ONE_B,
    MethodId.TWO_AI,
    MethodId.TWO_AII,
    MethodId.TWO_BI,
    MethodId.TWO_BII,
    MethodId.ROSSMO,
)


@dataclass
class RunConfig:
    dataset: str | None = None
    out_dir: str = "out"
    grid: Grid = field(default_factory=Grid)
    methods: tuple[MethodId, ...] = DEFAULT_METHODS
    scope: Scope = Scope.ALL
    seed: int = 0
    nonres_weight: float = NONRES_WEIGHT_FROM_FREQUENCIES
    quadrature: dict = field(default_factory=dict)
    classifier_options: dict = field(default_factory=dict)


def _parse_methods(raw: str) -> tuple[MethodId, ...]:
    out = []
    for token in raw.split(","):
        token = token.strip().lower()
        if not token:
            continue
        try:
            out.append(MethodId(token))
        except ValueError:
            valid = ", ".join(m.value for m in MethodId)
            raise ValueError(f"unknown method {token!r}; choose from {valid}") from None
    if not out:
        raise ValueError("empty method list")
    return tuple(out)


def _parse_scope(raw: str) -> Scope:
    try:
        return Scope(raw.strip().lower())
    except ValueError:
        raise ValueError(
            f"unknown scope {raw!r}; choose 'residents' or 'all'"
        ) from None


def _parse_grid_shape(raw: str) -> tuple[int, int]:
    """'WxH' -> (ncols, nrows)."""
    try:
        w, h = raw.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ValueError(f"grid shape must look like 100x70, got {raw!r}") from None


def _parse_bounds(raw: str) -> tuple[float, float, float, float]:
    parts = [float(p) for p in raw.split(",")]
    if len(parts) != 4:
        raise ValueError(f"bounds must be W,E,S,N, got {raw!r}")
    return tuple(parts)


_CLASSIFIER_KEYS = {
    "classify_nn_km": "nn_threshold_km",
    "classify_cutoff_km": "cluster_cutoff_km",
    "classify_single_coverage": "single_cluster_coverage",
    "classify_multi_coverage": "multi_cluster_coverage",
}
_NODE_KEYS = {f"nodes_{p}": p for p in ("alpha", "theta", "sigma", "sigma1", "sigma2")}


def load_config(path) -> RunConfig:
    """Read a flat key = value config file."""
    config = RunConfig()
    grid_kwargs: dict = {}
    for line_num, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_num}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "dataset":
            config.dataset = value
        elif key == "out":
            config.out_dir = value
        elif key == "methods":
            config.methods = _parse_methods(value)
        elif key == "scope":
            config.scope = _parse_scope(value)
        elif key == "seed":
            config.seed = int(value)
        elif key == "nonres_weight":
            config.nonres_weight = float(value)
        elif key == "grid":
            ncols, nrows = _parse_grid_shape(value)
            grid_kwargs.update(ncols=ncols, nrows=nrows)
        elif key == "bounds":
            west, east, south, north = _parse_bounds(value)
            grid_kwargs.update(west=west, east=east, south=south, north=north)
        elif key == "zone":
            grid_kwargs.update(zone=int(value))
        elif key in _NODE_KEYS:
            config.quadrature[_NODE_KEYS[key]] = int(value)
        elif key in _CLASSIFIER_KEYS:
            config.classifier_options[_CLASSIFIER_KEYS[key]] = float(value)
        else:
            raise ValueError(f"{path}:{line_num}: unknown key {key!r}")
    if grid_kwargs:
        config.grid = replace(Grid(), **grid_kwargs)
    return config


def _apply_flags(config: RunConfig, args) -> RunConfig:
    if getattr(args, "dataset", None):
        config.dataset = args.dataset
    if getattr(args, "out", None):
        config.out_dir = args.out
    if getattr(args, "method", None):
        config.methods = _parse_methods(",".join(args.method))
    if getattr(args, "scope", None):
        config.scope = _parse_scope(args.scope)
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    grid_kwargs = {}
    if getattr(args, "grid", None):
        ncols, nrows = _parse_grid_shape(args.grid)
        grid_kwargs.update(ncols=ncols, nrows=nrows)
    if getattr(args, "bounds", None):
        west, east, south, north = _parse_bounds(args.bounds)
        grid_kwargs.update(west=west, east=east, south=south, north=north)
    if grid_kwargs:
        config.grid = replace(config.grid, **grid_kwargs)
    return config


def load_dataset(path, zone: int = 18) -> Dataset:
    """Read either CSV layout, telling them apart by the header row."""
    text = Path(path).read_text(encoding="utf-8")
    first_line = text.splitlines()[0].strip() if text.strip() else ""
    fields = [f.strip().lstrip("﻿") for f in first_line.split(",")]
    if fields == UTM_CSV_HEADER:
        return parse_utm_csv(text)
    return group_into_series(parse_records(text), zone=zone)


def cmd_convert(config: RunConfig, args) -> int:
    records = parse_records(Path(args.input).read_text(encoding="utf-8"))
    out_lines = [
        ",".join(
            CSV_HEADER
            + [
                "zone",
                "crime_easting_km",
                "crime_northing_km",
                "anchor_easting_km",
                "anchor_northing_km",
            ]
        )
    ]
    zone = config.grid.zone
    for r in records:
        crime = latlon_to_utm(r.crime_site, forced_zone=zone)
        anchor = latlon_to_utm(r.anchor, forced_zone=zone)
        out_lines.append(
            ",".join(
                [
                    r.offender_id,
                    r.crime_id,
                    r.ucr_code,
                    repr(r.crime_site.lat),
                    repr(r.crime_site.lon),
                    repr(r.anchor.lat),
                    repr(r.anchor.lon),
                    str(crime.zone),
                    repr(crime.easting),
                    repr(crime.northing),
                    repr(anchor.easting),
                    repr(anchor.northing),
                ]
            )
        )
    text = "\n".join(out_lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_classify(config: RunConfig, args) -> int:
    ds = load_dataset(config.dataset, zone=config.grid.zone)
    lines = ["offender_id,label,n_clusters"]
    for series in ds.series:
        label = classify(series.xy, **config.classifier_options)
        lines.append(f"{series.offender_id},{label.kind.value},{len(label.clusters)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def write_surface_csv(surface: PosteriorSurface, path) -> None:
    grid = surface.grid
    lines = ["row,col,easting,northing,mass"]
    for row in range(grid.nrows):
        for col in range(grid.ncols):
            center = cell_center(grid, row, col)
            lines.append(
                f"{row},{col},{center.easting!r},{center.northing!r},"
                f"{float(surface.mass[row, col])!r}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_surface_pgm(surface: PosteriorSurface, path) -> None:
    """8-bit ASCII PGM, north row first, mass rescaled so the peak is 255."""
    grid = surface.grid
    scaled = np.rint(surface.mass / surface.mass.max() * 255.0).astype(int)
    lines = ["P2", f"{grid.ncols} {grid.nrows}", "255"]
    for row in range(grid.nrows - 1, -1, -1):
        lines.append(" ".join(str(v) for v in scaled[row]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_surface_sidecar(
    surface: PosteriorSurface, offender_id: str, method: MethodId, subtype: str, path
) -> None:
    grid = surface.grid
    top = []
    for rank, (row, col) in enumerate(rank_cells(surface)[:20], start=1):
        center = cell_center(grid, row, col)
        top.append(
            {
                "rank": rank,
                "row": row,
                "col": col,
                "easting": center.easting,
                "northing": center.northing,
                "mass": float(surface.mass[row, col]),
            }
        )
    payload = {
        "offender_id": offender_id,
        "method": method.value,
        "subtype": subtype,
        "top_cells": top,
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def cmd_profile(config: RunConfig, args) -> int:
    ds = load_dataset(config.dataset, zone=config.grid.zone)
    series = ds.get(args.offender)
    method = (
        MethodId(args.method[0].strip().lower()) if args.method else config.methods[0]
    )
    labels = {
        s.offender_id: classify(s.xy, **config.classifier_options) for s in ds.series
    }
    label = labels[series.offender_id]
    if method is MethodId.ROSSMO:
        surface = hit_score_surface(series, config.grid)
    else:
        priors = build_prior_set(ds, series.offender_id, labels, config.grid)
        surface = run_method(
            series,
            method,
            label,
            priors,
            config.grid,
            config.nonres_weight,
            config.quadrature or None,
        )
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{series.offender_id}_{method.value}"
    write_surface_csv(surface, out_dir / f"{stem}_surface.csv")
    write_surface_pgm(surface, out_dir / f"{stem}.pgm")
    write_surface_sidecar(
        surface, series.offender_id, method, label.kind.value, out_dir / f"{stem}.json"
    )
    print(f"wrote {stem}_surface.csv, {stem}.pgm, {stem}.json in {out_dir}")
    return 0


def cmd_evaluate(config: RunConfig, args) -> int:
    ds = load_dataset(config.dataset, zone=config.grid.zone)
    report = compare_methods(
        ds,
        config.methods,
        config.scope,
        grid=config.grid,
        nonres_weight=config.nonres_weight,
        classifier_options=config.classifier_options,
        quadrature=config.quadrature or None,
    )
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "results.csv").write_text(report.results_csv(), encoding="utf-8")
    (out_dir / "curves.csv").write_text(report.curves_csv(), encoding="utf-8")
    print(report.format_table())
    missing = [
        m.value for m in config.methods if all(c.method is not m for c in report.curves)
    ]
    for failure in report.failures:
        print(
            f"error: offender {failure.offender_id} "
            f"{('method ' + failure.method) if failure.method else ''}: "
            f"{failure.message}",
            file=sys.stderr,
        )
    if missing:
        print(f"error: no results for method(s): {', '.join(missing)}", file=sys.stderr)
        return 1
    return 1 if report.failures else 0


def cmd_emit_grid(config: RunConfig, args) -> int:
    grid = config.grid
    lines = ["row,col,easting,northing"]
    for row in range(grid.nrows):
        for col in range(grid.ncols):
            center = cell_center(grid, row, col)
            lines.append(f"{row},{col},{center.easting!r},{center.northing!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoprofile",
        description="Anchor-point estimation from serial crime-site coordinates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--dataset", help="input series CSV")
        p.add_argument("--out", help="output file or directory")
        p.add_argument("--method", action="append", help="method id (repeatable)")
        p.add_argument("--scope", help="residents | all")
        p.add_argument("--seed", type=int, help="run seed recorded in the config")
        p.add_argument("--grid", help="grid shape WxH, e.g. 100x70")
        p.add_argument("--bounds", help="grid bounds W,E,S,N in km")

    p_convert = sub.add_parser("convert", help="append planar coordinates to a CSV")
    p_convert.add_argument("input", help="canonical geographic CSV")
    add_common(p_convert)
    p_convert.set_defaults(fn=cmd_convert)

    p_classify = sub.add_parser("classify", help="emit per-offender subtype labels")
    add_common(p_classify)
    p_classify.set_defaults(fn=cmd_classify)

    p_profile = sub.add_parser("profile", help="posterior surface for one offender")
    p_profile.add_argument("--offender", required=True)
    add_common(p_profile)
    p_profile.set_defaults(fn=cmd_profile)

    p_eval = sub.add_parser("evaluate", help="search-fraction comparison of methods")
    add_common(p_eval)
    p_eval.set_defaults(fn=cmd_evaluate)

    p_grid = sub.add_parser("emit-grid", help="write the grid cell centers")
    add_common(p_grid)
    p_grid.set_defaults(fn=cmd_emit_grid)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else RunConfig()
        config = _apply_flags(config, args)
        if args.command in {"classify", "profile", "evaluate"} and not config.dataset:
            raise ValueError("a dataset is required (--dataset or config)")
        return args.fn(config, args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
