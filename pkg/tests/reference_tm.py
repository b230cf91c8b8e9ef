"""Independent transverse Mercator reference for the geodesy tests.

Classic Snyder/Army-Map-Service formulation: meridian arc plus polynomial
series in l = (lon - lon0) * cos(lat), expanded in the squared eccentricity.
Deliberately a different derivation path from the library's conformal
latitude series; in-zone agreement of the two is a genuine cross-check.
Works in meters and degrees, matching how these formulas are usually quoted.
"""

import math

A = 6378137.0
F = 1.0 / 298.257223563
K0 = 0.9996

E2 = F * (2.0 - F)
E4 = E2 * E2
E6 = E4 * E2
EP2 = E2 / (1.0 - E2)

_M1 = 1.0 - E2 / 4.0 - 3.0 * E4 / 64.0 - 5.0 * E6 / 256.0
_M2 = 3.0 * E2 / 8.0 + 3.0 * E4 / 32.0 + 45.0 * E6 / 1024.0
_M3 = 15.0 * E4 / 256.0 + 45.0 * E6 / 1024.0
_M4 = 35.0 * E6 / 3072.0


def _meridian_arc(phi):
    return A * (
        _M1 * phi
        - _M2 * math.sin(2.0 * phi)
        + _M3 * math.sin(4.0 * phi)
        - _M4 * math.sin(6.0 * phi)
    )


def forward(lat_deg, lon_deg, zone):
    """(lat, lon) degrees -> (easting_m, northing_m) in the given zone."""
    phi = math.radians(lat_deg)
    lam0 = math.radians(zone * 6.0 - 183.0)
    lam = math.radians(lon_deg)

    sp, cp = math.sin(phi), math.cos(phi)
    n = A / math.sqrt(1.0 - E2 * sp * sp)
    t = math.tan(phi) ** 2
    c = EP2 * cp * cp
    a1 = cp * (lam - lam0)

    easting = K0 * n * (
        a1
        + a1**3 / 6.0 * (1.0 - t + c)
        + a1**5 / 120.0 * (5.0 - 18.0 * t + t * t + 72.0 * c - 58.0 * EP2)
    ) + 500000.0
    northing = K0 * (
        _meridian_arc(phi)
        + n * math.tan(phi) * (
            a1**2 / 2.0
            + a1**4 / 24.0 * (5.0 - t + 9.0 * c + 4.0 * c * c)
            + a1**6 / 720.0 * (61.0 - 58.0 * t + t * t + 600.0 * c - 330.0 * EP2)
        )
    )
    if lat_deg < 0.0:
        northing += 10000000.0
    return easting, northing


def inverse(easting_m, northing_m, zone, southern=False):
    """(easting_m, northing_m, zone) -> (lat, lon) degrees, footpoint series."""
    x = easting_m - 500000.0
    y = northing_m - 10000000.0 if southern else northing_m

    m = y / K0
    mu = m / (A * _M1)

    e1 = (1.0 - math.sqrt(1.0 - E2)) / (1.0 + math.sqrt(1.0 - E2))
    phi1 = mu + (
        (3.0 * e1 / 2.0 - 27.0 * e1**3 / 32.0) * math.sin(2.0 * mu)
        + (21.0 * e1**2 / 16.0 - 55.0 * e1**4 / 32.0) * math.sin(4.0 * mu)
        + (151.0 * e1**3 / 96.0) * math.sin(6.0 * mu)
        + (1097.0 * e1**4 / 512.0) * math.sin(8.0 * mu)
    )

    sp, cp = math.sin(phi1), math.cos(phi1)
    c1 = EP2 * cp * cp
    t1 = math.tan(phi1) ** 2
    n1 = A / math.sqrt(1.0 - E2 * sp * sp)
    r1 = A * (1.0 - E2) / (1.0 - E2 * sp * sp) ** 1.5
    d = x / (n1 * K0)

    lat = phi1 - (n1 * math.tan(phi1) / r1) * (
        d * d / 2.0
        - d**4 / 24.0 * (5.0 + 3.0 * t1 + 10.0 * c1 - 4.0 * c1 * c1 - 9.0 * EP2)
        + d**6 / 720.0 * (
            61.0 + 90.0 * t1 + 298.0 * c1 + 45.0 * t1 * t1
            - 252.0 * EP2 - 3.0 * c1 * c1
        )
    )
    lon = (
        d
        - d**3 / 6.0 * (1.0 + 2.0 * t1 + c1)
        + d**5 / 120.0 * (
            5.0 - 2.0 * c1 + 28.0 * t1 - 3.0 * c1 * c1 + 8.0 * EP2 + 24.0 * t1 * t1
        )
    ) / cp
    return math.degrees(lat), math.degrees(lon) + (zone * 6.0 - 183.0)
