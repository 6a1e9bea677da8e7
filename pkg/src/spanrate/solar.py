"""Solar geometry and clear-sky irradiance.

Sun position follows the NOAA general solar position equations (Meeus-based,
accurate to well under 0.1 degree for 1950-2100).  Irradiance uses a fixed
top-of-atmosphere constant attenuated through a Kasten-Young air mass and
projected on the horizontal plane.  Cloud cover is never modelled.
"""

from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .exceptions import InvalidInputError

SOLAR_CONSTANT = 1361.0  # W/m^2 at the top of the atmosphere
ATMOSPHERIC_TRANSMITTANCE = 0.7
AIR_MASS_EXPONENT = 0.678

_YEAR_MIN = 1950
_YEAR_MAX = 2100
_EPOCH = np.datetime64("1970-01-01T00:00:00", "s")


@dataclass(frozen=True)
class SolarPosition:
    elevation_deg: float
    azimuth_deg: float


@dataclass(frozen=True)
class Irradiance:
    i_t: float


def _to_unix_seconds(times):
    """Convert datetimes / datetime64 / pandas timestamps to float seconds since 1970 UTC."""
    if isinstance(times, datetime):
        if times.tzinfo is not None:
            times = times.astimezone(timezone.utc).replace(tzinfo=None)
        times = np.datetime64(times, "us")
    arr = np.asarray(times)
    if arr.dtype == object:
        arr = np.array(
            [
                np.datetime64(
                    t.astimezone(timezone.utc).replace(tzinfo=None)
                    if getattr(t, "tzinfo", None) is not None
                    else t,
                    "us",
                )
                for t in arr.ravel()
            ]
        ).reshape(arr.shape)
    if not np.issubdtype(arr.dtype, np.datetime64):
        raise InvalidInputError(f"cannot interpret {arr.dtype} values as timestamps")
    years = arr.astype("datetime64[Y]").astype(int) + 1970
    if np.any(years < _YEAR_MIN) or np.any(years > _YEAR_MAX):
        raise InvalidInputError(f"timestamps must fall within {_YEAR_MIN}-{_YEAR_MAX}")
    return (arr - _EPOCH) / np.timedelta64(1, "s")


def _check_coordinates(lat, lon):
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if np.any(~np.isfinite(lat)) or np.any(np.abs(lat) > 90.0):
        raise InvalidInputError("latitude must lie in [-90, 90]")
    if np.any(~np.isfinite(lon)) or np.any(np.abs(lon) > 180.0):
        raise InvalidInputError("longitude must lie in [-180, 180]")
    return lat, lon


def _refraction_deg(elev):
    """Atmospheric refraction correction (NOAA piecewise fit), degrees."""
    e = np.asarray(elev, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = np.tan(np.radians(e))
        high = 58.1 / t - 0.07 / t**3 + 0.000086 / t**5
        low = 1735.0 + e * (-518.2 + e * (103.4 + e * (-12.79 + e * 0.711)))
        below = -20.772 / t
    arcsec = np.where(
        e > 85.0, 0.0, np.where(e > 5.0, high, np.where(e > -0.575, low, below))
    )
    return arcsec / 3600.0


def solar_position_array(times, lat, lon):
    """Vectorised apparent solar elevation and azimuth.

    Parameters
    ----------
    times : array_like of datetime64, or datetime
        UTC instants.  Naive values are taken as UTC.
    lat, lon : float or array_like
        Degrees; broadcast against ``times``.

    Returns
    -------
    elevation_deg, azimuth_deg : ndarray
        Apparent (refracted) elevation above the horizon, and azimuth
        clockwise from north in ``[0, 360)``.
    """
    lat, lon = _check_coordinates(lat, lon)
    secs = _to_unix_seconds(times)

    jd = secs / 86400.0 + 2440587.5
    jc = (jd - 2451545.0) / 36525.0

    mean_long = np.mod(280.46646 + jc * (36000.76983 + jc * 0.0003032), 360.0)
    mean_anom = 357.52911 + jc * (35999.05029 - 0.0001537 * jc)
    ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc)
    m = np.radians(mean_anom)
    centre = (
        np.sin(m) * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + np.sin(2 * m) * (0.019993 - 0.000101 * jc)
        + np.sin(3 * m) * 0.000289
    )
    true_long = mean_long + centre
    omega = np.radians(125.04 - 1934.136 * jc)
    app_long = true_long - 0.00569 - 0.00478 * np.sin(omega)
    mean_obliq = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0
    obliq = np.radians(mean_obliq + 0.00256 * np.cos(omega))
    decl = np.arcsin(np.sin(obliq) * np.sin(np.radians(app_long)))

    var_y = np.tan(obliq / 2.0) ** 2
    l0 = np.radians(mean_long)
    eq_time = 4.0 * np.degrees(
        var_y * np.sin(2 * l0)
        - 2 * ecc * np.sin(m)
        + 4 * ecc * var_y * np.sin(m) * np.cos(2 * l0)
        - 0.5 * var_y**2 * np.sin(4 * l0)
        - 1.25 * ecc**2 * np.sin(2 * m)
    )

    minutes_of_day = np.mod(secs, 86400.0) / 60.0
    true_solar_time = np.mod(minutes_of_day + eq_time + 4.0 * lon, 1440.0)
    hour_angle = np.radians(true_solar_time / 4.0 - 180.0)

    phi = np.radians(lat)
    cos_zen = np.sin(phi) * np.sin(decl) + np.cos(phi) * np.cos(decl) * np.cos(hour_angle)
    zenith = np.degrees(np.arccos(np.clip(cos_zen, -1.0, 1.0)))
    geometric_elev = 90.0 - zenith
    elevation = np.clip(geometric_elev + _refraction_deg(geometric_elev), -90.0, 90.0)

    az = np.degrees(
        np.arctan2(
            np.sin(hour_angle),
            np.cos(hour_angle) * np.sin(phi) - np.tan(decl) * np.cos(phi),
        )
    )
    azimuth = np.mod(az + 180.0, 360.0)
    # mod can return exactly 360.0 for tiny negative inputs
    azimuth = np.where(azimuth >= 360.0, 0.0, azimuth)
    return elevation, azimuth


def solar_position(timestamp_utc, lat, lon):
    """Apparent solar position for one instant and location.

    >>> pos = solar_position(datetime(2023, 6, 21, 10, 22), 59.44, 24.75)
    >>> round(pos.elevation_deg)
    54
    """
    elev, az = solar_position_array(timestamp_utc, lat, lon)
    return SolarPosition(float(elev), float(az))


def air_mass(elevation_deg):
    """Kasten-Young relative optical air mass; ``inf`` with the sun below the horizon."""
    h = np.asarray(elevation_deg, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        am = 1.0 / (np.sin(np.radians(h)) + 0.50572 * (h + 6.07995) ** -1.6364)
    return np.where(h > 0.0, am, np.inf)


def clear_sky_ghi(elevation_deg):
    """Clear-sky global horizontal irradiance, W/m^2, for solar elevation(s)."""
    h = np.asarray(elevation_deg, dtype=float)
    up = h > 0.0
    am = np.where(up, air_mass(np.where(up, h, 90.0)), 1.0)
    beam = SOLAR_CONSTANT * ATMOSPHERIC_TRANSMITTANCE ** (am**AIR_MASS_EXPONENT)
    ghi = np.where(up, beam * np.sin(np.radians(np.where(up, h, 0.0))), 0.0)
    ghi = np.clip(ghi, 0.0, SOLAR_CONSTANT)
    return float(ghi) if ghi.ndim == 0 else ghi


def clear_sky_irradiance(pos):
    """Irradiance reaching a conductor for a given :class:`SolarPosition`."""
    return Irradiance(float(clear_sky_ghi(pos.elevation_deg)))


def irradiance_series(times, lat, lon):
    """Clear-sky irradiance for many instants at one site; returns an ndarray."""
    elev, _ = solar_position_array(times, lat, lon)
    return np.asarray(clear_sky_ghi(elev), dtype=float)
