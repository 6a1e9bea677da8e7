"""Spherical-Earth helpers for span endpoints."""

import math

from .exceptions import InvalidInputError

EARTH_RADIUS_KM = 6371.0


def span_bearing(start, end):
    """Initial great-circle bearing from ``start`` to ``end``.

    Parameters
    ----------
    start, end : tuple of float
        ``(lat, lon)`` in degrees.

    Returns
    -------
    float
        Compass bearing in degrees, clockwise from north, in ``[0, 360)``.
    """
    lat1, lon1 = start
    lat2, lon2 = end
    if lat1 == lat2 and lon1 == lon2:
        raise InvalidInputError("span endpoints are identical; bearing undefined")
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dlon = math.radians(lon2 - lon1)
    x = math.sin(dlon) * math.cos(p2)
    y = math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dlon)
    b = math.degrees(math.atan2(x, y)) % 360.0
    # tiny negative angles round up to exactly 360 under the modulo
    return 0.0 if b >= 360.0 else b


def span_length_m(start, end):
    """Haversine distance in metres."""
    p1, p2 = math.radians(start[0]), math.radians(end[0])
    dp = p2 - p1
    dl = math.radians(end[1] - start[1])
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * 1000.0 * math.asin(min(1.0, math.sqrt(a)))


def midpoint(start, end):
    # spans are a few hundred metres long, arithmetic mean is adequate
    return (0.5 * (start[0] + end[0]), 0.5 * (start[1] + end[1]))


def angular_difference_deg(a, b):
    """Smallest absolute difference between two compass angles, in ``[0, 180]``."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)
