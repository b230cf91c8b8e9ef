"""Crime-series ingestion: canonical CSV to grouped per-offender series.

The canonical file is comma-separated UTF-8 with the exact header

    offender_id,crime_id,ucr_code,crime_lat,crime_lon,anchor_lat,anchor_lon

and WGS84 decimal-degree coordinates. Grouping projects every point into
one shared UTM zone so the whole jurisdiction lives on a single planar
frame, and drops offenders with fewer than three crimes.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from geoprofile.geodesy import GeoPoint, OutOfRangeError, UtmPoint, latlon_to_utm

__all__ = [
    "CSV_HEADER",
    "CrimeRecord",
    "CrimeSeries",
    "Dataset",
    "SchemaError",
    "RowError",
    "DataError",
    "parse_records",
    "records_to_csv",
    "group_into_series",
    "leave_one_out",
]

logger = logging.getLogger(__name__)

CSV_HEADER = [
    "offender_id",
    "crime_id",
    "ucr_code",
    "crime_lat",
    "crime_lon",
    "anchor_lat",
    "anchor_lon",
]

DEFAULT_ZONE = 18
MIN_SERIES_LENGTH = 3
ANCHOR_CONSISTENCY_DEG = 1e-9


class SchemaError(ValueError):
    """The file header does not match the canonical schema."""


class RowError(ValueError):
    """A data row could not be parsed or violates a coordinate range."""


class DataError(ValueError):
    """Records are individually fine but mutually inconsistent."""


@dataclass(frozen=True)
class CrimeRecord:
    offender_id: str
    crime_id: str
    ucr_code: str
    crime_site: GeoPoint
    anchor: GeoPoint

    def __post_init__(self) -> None:
        if not self.offender_id:
            raise ValueError("offender_id must be nonempty")


@dataclass(frozen=True)
class CrimeSeries:
    """One offender's crime sites on the planar frame.

    The anchor is ground truth carried along for evaluation only; no
    estimation code may read it.
    """

    offender_id: str
    sites: tuple[UtmPoint, ...]
    anchor: UtmPoint | None = None

    def __post_init__(self) -> None:
        if not self.sites:
            raise ValueError("a crime series needs at least one site")
        zones = {s.zone for s in self.sites}
        if self.anchor is not None:
            zones.add(self.anchor.zone)
        if len(zones) != 1:
            raise ValueError(f"sites span multiple UTM zones: {sorted(zones)}")

    @property
    def n(self) -> int:
        return len(self.sites)

    @cached_property
    def xy(self) -> np.ndarray:
        """(n, 2) easting/northing array in km."""
        return np.array([(s.easting, s.northing) for s in self.sites])

    def restrict(self, indices) -> "CrimeSeries":
        """Sub-series with only the given site indices (order preserved)."""
        picked = tuple(self.sites[i] for i in sorted(indices))
        return CrimeSeries(self.offender_id, picked, self.anchor)


@dataclass(frozen=True)
class Dataset:
    series: tuple[CrimeSeries, ...]

    def __post_init__(self) -> None:
        ids = [s.offender_id for s in self.series]
        if len(ids) != len(set(ids)):
            raise DataError("offender ids must be unique")

    @property
    def total_crimes(self) -> int:
        return sum(s.n for s in self.series)

    def offender_ids(self) -> list[str]:
        return [s.offender_id for s in self.series]

    def get(self, offender_id: str) -> CrimeSeries:
        for s in self.series:
            if s.offender_id == offender_id:
                return s
        raise KeyError(f"unknown offender id {offender_id!r}")


def _text_stream(stream):
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, str):
        return io.StringIO(stream)
    if hasattr(stream, "read"):
        probe = stream.read(0)
        if isinstance(probe, bytes):
            return io.TextIOWrapper(stream, encoding="utf-8")
        return stream
    raise TypeError(f"cannot read records from {type(stream).__name__}")


def _coord(row_num: int, name: str, raw: str, lo: float, hi: float, half_open: bool) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise RowError(f"row {row_num}: cannot parse {name}={raw!r}") from None
    in_range = lo <= value < hi if half_open else lo <= value <= hi
    if not np.isfinite(value) or not in_range:
        raise RowError(f"row {row_num}: {name}={raw!r} out of range")
    return value


def parse_records(stream) -> list[CrimeRecord]:
    """Read canonical CSV into records; any malformed row raises RowError."""
    reader = csv.reader(_text_stream(stream))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty file: expected a header row") from None
    header = [h.strip().lstrip("﻿") for h in header]
    if header != CSV_HEADER:
        raise SchemaError(
            f"header mismatch: expected {','.join(CSV_HEADER)}, got {','.join(header)}"
        )
    records = []
    for row_num, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise RowError(f"row {row_num}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        offender_id, crime_id, ucr_code = (cell.strip() for cell in row[:3])
        if not offender_id:
            raise RowError(f"row {row_num}: empty offender_id")
        crime_lat = _coord(row_num, "crime_lat", row[3], -90.0, 90.0, False)
        crime_lon = _coord(row_num, "crime_lon", row[4], -180.0, 180.0, True)
        anchor_lat = _coord(row_num, "anchor_lat", row[5], -90.0, 90.0, False)
        anchor_lon = _coord(row_num, "anchor_lon", row[6], -180.0, 180.0, True)
        records.append(
            CrimeRecord(
                offender_id=offender_id,
                crime_id=crime_id,
                ucr_code=ucr_code,
                crime_site=GeoPoint(crime_lat, crime_lon),
                anchor=GeoPoint(anchor_lat, anchor_lon),
            )
        )
    return records


def records_to_csv(records) -> str:
    """Serialize records back to the canonical CSV (LF line endings)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(
            [
                r.offender_id,
                r.crime_id,
                r.ucr_code,
                repr(r.crime_site.lat),
                repr(r.crime_site.lon),
                repr(r.anchor.lat),
                repr(r.anchor.lon),
            ]
        )
    return out.getvalue()


def group_into_series(
    records,
    zone: int = DEFAULT_ZONE,
    min_series_length: int = MIN_SERIES_LENGTH,
) -> Dataset:
    """Group records by offender and project everything into one UTM zone.

    Offenders with fewer than ``min_series_length`` crimes are dropped with
    a warning. An offender whose rows disagree about the anchor location
    is a data error.
    """
    by_offender: dict[str, list[CrimeRecord]] = {}
    for record in records:
        by_offender.setdefault(record.offender_id, []).append(record)

    series = []
    for offender_id, rows in by_offender.items():
        anchor_geo = rows[0].anchor
        for r in rows[1:]:
            if (
                abs(r.anchor.lat - anchor_geo.lat) > ANCHOR_CONSISTENCY_DEG
                or abs(r.anchor.lon - anchor_geo.lon) > ANCHOR_CONSISTENCY_DEG
            ):
                raise DataError(
                    f"offender {offender_id}: inconsistent anchor coordinates"
                )
        if len(rows) < min_series_length:
            logger.warning(
                "excluding offender %s: only %d crime(s), need %d",
                offender_id,
                len(rows),
                min_series_length,
            )
            continue
        try:
            sites = tuple(latlon_to_utm(r.crime_site, forced_zone=zone) for r in rows)
            anchor = latlon_to_utm(anchor_geo, forced_zone=zone)
        except OutOfRangeError as exc:
            raise DataError(f"offender {offender_id}: {exc}") from exc
        series.append(CrimeSeries(offender_id, sites, anchor))
    return Dataset(tuple(series))


def leave_one_out(ds: Dataset, offender_id: str) -> Dataset:
    """All series except the named offender's."""
    if offender_id not in ds.offender_ids():
        raise KeyError(f"unknown offender id {offender_id!r}")
    return Dataset(tuple(s for s in ds.series if s.offender_id != offender_id))
