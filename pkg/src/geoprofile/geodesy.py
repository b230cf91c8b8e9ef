"""WGS84 geographic to UTM planar conversion.

Forward transverse Mercator on the WGS84 ellipsoid via the Krueger
series in the third flattening n (conformal latitude, then a trig series
to the n^6 terms), so in-zone accuracy is far below a meter. Results are
kept in kilometers: every travel-distance parameter downstream is in km.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "GeoPoint",
    "UtmPoint",
    "OutOfRangeError",
    "utm_zone",
    "latlon_to_utm",
]

# WGS84 ellipsoid
_A_M = 6378137.0
_F = 1.0 / 298.257223563
_E = math.sqrt(_F * (2.0 - _F))

# UTM conventions
SCALE = 0.9996
FALSE_EASTING_KM = 500.0
FALSE_NORTHING_SOUTH_KM = 10000.0

# Krueger series in n = f / (2 - f); coefficients through n^6.
_N = _F / (2.0 - _F)
_RECT_RADIUS_M = (_A_M / (1.0 + _N)) * (
    1.0 + _N**2 / 4.0 + _N**4 / 64.0 + _N**6 / 256.0
)
_ALPHA = (
    _N / 2.0 - 2.0 * _N**2 / 3.0 + 5.0 * _N**3 / 16.0 + 41.0 * _N**4 / 180.0
    - 127.0 * _N**5 / 288.0 + 7891.0 * _N**6 / 37800.0,
    13.0 * _N**2 / 48.0 - 3.0 * _N**3 / 5.0 + 557.0 * _N**4 / 1440.0
    + 281.0 * _N**5 / 630.0 - 1983433.0 * _N**6 / 1935360.0,
    61.0 * _N**3 / 240.0 - 103.0 * _N**4 / 140.0 + 15061.0 * _N**5 / 26880.0
    + 167603.0 * _N**6 / 181440.0,
    49561.0 * _N**4 / 161280.0 - 179.0 * _N**5 / 168.0
    + 6601661.0 * _N**6 / 7257600.0,
    34729.0 * _N**5 / 80640.0 - 3418889.0 * _N**6 / 1995840.0,
    212378941.0 * _N**6 / 319334400.0,
)


class OutOfRangeError(ValueError):
    """Coordinate outside the domain of the projection."""


@dataclass(frozen=True)
class GeoPoint:
    """Geographic coordinates, decimal degrees on WGS84."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise OutOfRangeError("latitude and longitude must be finite")
        if not -90.0 <= self.lat <= 90.0:
            raise OutOfRangeError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon < 180.0:
            raise OutOfRangeError(f"longitude {self.lon} outside [-180, 180)")


@dataclass(frozen=True)
class UtmPoint:
    """Planar UTM coordinates in kilometers."""

    zone: int
    easting: float
    northing: float

    def __post_init__(self) -> None:
        if not 1 <= self.zone <= 60:
            raise OutOfRangeError(f"zone {self.zone} outside [1, 60]")
        if not 0.0 < self.easting < 1000.0:
            raise OutOfRangeError(f"easting {self.easting} km outside (0, 1000)")
        if not 0.0 <= self.northing < 10000.0:
            raise OutOfRangeError(f"northing {self.northing} km outside [0, 10000)")


def utm_zone(lon: float) -> int:
    """UTM zone number (1..60) for a longitude in decimal degrees."""
    if not math.isfinite(lon):
        raise OutOfRangeError("longitude must be finite")
    if not -180.0 <= lon < 180.0:
        raise OutOfRangeError(f"longitude {lon} outside [-180, 180)")
    zone = int(math.floor((lon + 180.0) / 6.0)) + 1
    return min(max(zone, 1), 60)


def central_meridian(zone: int) -> float:
    """Central meridian of a UTM zone, decimal degrees."""
    return zone * 6.0 - 183.0


def latlon_to_utm(p: GeoPoint, forced_zone: int | None = None) -> UtmPoint:
    """Project a geographic point to UTM kilometers.

    With ``forced_zone`` the projection uses that zone's central meridian
    even for points that nominally belong to a neighbouring zone, so one
    jurisdiction can share a single planar frame.
    """
    if abs(p.lat) > 84.0:
        raise OutOfRangeError(f"latitude {p.lat} outside UTM domain [-84, 84]")
    if forced_zone is not None and not 1 <= forced_zone <= 60:
        raise OutOfRangeError(f"forced zone {forced_zone} outside [1, 60]")
    zone = forced_zone if forced_zone is not None else utm_zone(p.lon)

    phi = math.radians(p.lat)
    lam = math.radians(p.lon - central_meridian(zone))
    # wrap to (-pi, pi] so forced zones far from the point still project
    lam = math.remainder(lam, 2.0 * math.pi)

    sphi = math.sin(phi)
    # conformal latitude, expressed through its tangent
    t = math.sinh(math.atanh(sphi) - _E * math.atanh(_E * sphi))
    xi = math.atan2(t, math.cos(lam))
    eta = math.asinh(math.sin(lam) / math.hypot(t, math.cos(lam)))

    x = xi
    y = eta
    for j, a in enumerate(_ALPHA, start=1):
        x += a * math.sin(2 * j * xi) * math.cosh(2 * j * eta)
        y += a * math.cos(2 * j * xi) * math.sinh(2 * j * eta)

    k = SCALE * _RECT_RADIUS_M / 1000.0
    easting = k * y + FALSE_EASTING_KM
    northing = k * x
    if p.lat < 0.0:
        northing += FALSE_NORTHING_SOUTH_KM
    return UtmPoint(zone=zone, easting=easting, northing=northing)
