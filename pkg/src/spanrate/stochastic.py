"""Monte Carlo confidence intervals for wind speed, direction and temperature.

Wind components are drawn from independent normals, converted to speed and
direction, and summarised by a log-normal (speed) and a von Mises (direction)
fit.  Temperature stays normal, so its interval is analytic.

Direction convention
--------------------
Sample directions follow ``atan2(v, u) + pi``: radians, counter-clockwise
from east, pointing to where the wind comes from.  Span bearings are compass
azimuths (clockwise from north).  :func:`direction_to_azimuth` converts the
former to the latter, and :func:`minimal_attack_angle` expects both its
arguments in compass terms.

The ``*_batch`` functions work on many forecasts at once (one row per
forecast) and are what the rating pipeline uses; the single-forecast
functions are thin wrappers around the same kernels.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .exceptions import DegenerateDistributionError, InvalidInputError

DEFAULT_SAMPLES = 1000
DEFAULT_LEVEL = 0.95

CALM_SPEED = 1e-6  # m/s, direction undefined below this
SPEED_CLAMP = 1e-4  # m/s, floor applied before taking logs
CALM_FRACTION_LIMIT = 0.5
LOG_SIGMA_FLOOR = 1e-9
KAPPA_CAP = 1e4
KAPPA_FLOOR = 1e-3
QUADRATURE_POINTS = 4096
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class WindComponentForecast:
    u_mean: float
    u_std: float
    v_mean: float
    v_std: float

    def __post_init__(self):
        if self.u_std < 0 or self.v_std < 0:
            raise InvalidInputError("standard deviations must be >= 0")


@dataclass(frozen=True)
class TemperatureForecast:
    mean_c: float
    std_c: float

    def __post_init__(self):
        if self.std_c < 0:
            raise InvalidInputError("standard deviation must be >= 0")


@dataclass(frozen=True)
class SpeedDistribution:
    """Log-normal wind speed: ``ln(w) ~ N(log_mu, log_sigma)``."""

    log_mu: float
    log_sigma: float

    @property
    def median(self):
        return float(np.exp(self.log_mu))

    @property
    def is_point_mass(self):
        return self.log_sigma <= LOG_SIGMA_FLOOR


@dataclass(frozen=True)
class DirectionDistribution:
    mu_rad: float
    kappa: float


@dataclass(frozen=True)
class ConfidenceInterval:
    """Interval at probability ``level``.

    For circular intervals ``lower`` and ``upper`` are angles in ``[0, 2*pi)``
    and the interval runs counter-clockwise (in the angle's own sense) from
    ``lower`` to ``upper``; ``full_circle`` marks the uninformative case.
    """

    lower: float
    upper: float
    level: float
    circular: bool = False
    full_circle: bool = False

    @property
    def width(self):
        if not self.circular:
            return self.upper - self.lower
        if self.full_circle:
            return TWO_PI
        return (self.upper - self.lower) % TWO_PI

    def contains(self, x):
        if not self.circular:
            return self.lower <= x <= self.upper
        if self.full_circle:
            return True
        return (x - self.lower) % TWO_PI <= self.width


def _check_level(level):
    if not 0.0 < level < 1.0:
        raise InvalidInputError("confidence level must lie in (0, 1)")


def task_seed(base_seed, *keys):
    """Stable 64-bit seed derived from ``base_seed`` and arbitrary keys.

    Uses BLAKE2b so the value does not depend on ``PYTHONHASHSEED``.
    """
    text = "|".join([str(int(base_seed))] + [str(k) for k in keys])
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def _standard_normals(seed, n):
    # one generator per task: results never depend on scheduling order
    return np.random.Generator(np.random.PCG64(seed)).standard_normal((2, n))


def sample_wind(fc, n=DEFAULT_SAMPLES, seed=None):
    """Draw ``n`` wind-component pairs; returns an ``(n, 2)`` array of ``(u, v)``."""
    if n < 2:
        raise InvalidInputError("need at least 2 Monte Carlo samples")
    z = _standard_normals(seed, n)
    u = fc.u_mean + fc.u_std * z[0]
    v = fc.v_mean + fc.v_std * z[1]
    return np.column_stack([u, v])


def speed_and_direction(u, v):
    """Speed, direction and calm flag for wind components.

    Returns
    -------
    w : ndarray or float
        ``sqrt(u**2 + v**2)``.
    theta : ndarray or float
        ``atan2(v, u) + pi`` wrapped to ``[0, 2*pi)``; NaN for calm samples.
    calm : ndarray or bool
        True where ``w < 1e-6`` m/s.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.hypot(u, v)
    theta = np.mod(np.arctan2(v, u) + np.pi, TWO_PI)
    theta = np.where(theta >= TWO_PI, 0.0, theta)
    calm = w < CALM_SPEED
    theta = np.where(calm, np.nan, theta)
    if w.ndim == 0:
        return float(w), float(theta), bool(calm)
    return w, theta, calm


def direction_to_azimuth(theta_rad):
    """Convert a direction from ``speed_and_direction`` to a compass azimuth in degrees."""
    az = np.mod(90.0 - np.degrees(theta_rad), 360.0)
    return np.where(az >= 360.0, 0.0, az) if np.ndim(az) else float(az % 360.0)


# ---------------------------------------------------------------- kernels


def _lognormal_kernel(w, valid):
    """Row-wise MLE of log-normal parameters over samples where ``valid``."""
    count = valid.sum(axis=-1)
    logs = np.log(np.maximum(w, SPEED_CLAMP))
    logs = np.where(valid, logs, 0.0)
    safe = np.maximum(count, 1)
    mu = logs.sum(axis=-1) / safe
    dev = np.where(valid, logs - mu[..., None], 0.0)
    sigma = np.sqrt((dev * dev).sum(axis=-1) / safe)
    return mu, np.maximum(sigma, LOG_SIGMA_FLOOR), count


def kappa_from_resultant(r_bar):
    """Approximate inverse of ``A(kappa) = I1(kappa)/I0(kappa)``, capped at 1e4."""
    r = np.clip(np.asarray(r_bar, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = 2 * r + r**3 + 5 * r**5 / 6
        k2 = -0.4 + 1.39 * r + 0.43 / (1 - r)
        k3 = 1.0 / (r**3 - 4 * r**2 + 3 * r)
    k = np.where(r < 0.53, k1, np.where(r < 0.85, k2, k3))
    k = np.where(np.isfinite(k) & (k >= 0), k, KAPPA_CAP)
    k = np.minimum(k, KAPPA_CAP)
    return float(k) if k.ndim == 0 else k


def _vonmises_from_moments(cos_terms, sin_terms, count):
    safe = np.maximum(count, 1)
    c = cos_terms.sum(axis=-1) / safe
    s = sin_terms.sum(axis=-1) / safe
    mu = np.mod(np.arctan2(s, c), TWO_PI)
    mu = np.where(mu >= TWO_PI, 0.0, mu)
    return mu, kappa_from_resultant(np.hypot(c, s))


def _vonmises_kernel(theta, valid):
    count = valid.sum(axis=-1)
    th = np.where(valid, theta, 0.0)
    mu, kappa = _vonmises_from_moments(
        np.where(valid, np.cos(th), 0.0), np.where(valid, np.sin(th), 0.0), count
    )
    return mu, kappa, count


def vonmises_half_width(kappa, level):
    """Half-width ``h`` with von Mises mass ``level`` on ``(mu - h, mu + h)``.

    The density is integrated with a cumulative composite Simpson rule over
    4096 sub-intervals of ``[0, x_max]``; the crossing of the target mass is
    located by binary search over the cumulative table and refined by linear
    interpolation.  ``x_max`` is pi, or (for concentrated distributions) the
    smallest of a fixed ladder of ranges covering twelve standard deviations
    of the normal limit.  ``kappa <= 1e-3`` returns pi (the whole circle).
    """
    _check_level(level)
    k = np.atleast_1d(np.asarray(kappa, dtype=float))
    out = np.full(k.shape, np.pi)
    work = k > KAPPA_FLOOR
    if np.any(work):
        out[work] = _half_width_rows(k[work], level)
    return float(out[0]) if np.ndim(kappa) == 0 else out.reshape(np.shape(kappa))


def _range_ladder(levels=40):
    t = np.linspace(0.0, 1.0, QUADRATURE_POINTS + 1)
    x_max = np.pi * 2.0 ** (-0.25 * np.arange(levels))
    x = x_max[:, None] * t[None, :]
    # cos(x) - 1 without cancellation for small x
    return x_max, x, -2.0 * np.sin(0.5 * x) ** 2


_LADDER_XMAX, _LADDER_X, _LADDER_COSM1 = _range_ladder()


def _half_width_rows(kk, level):
    wanted = np.minimum(np.pi, 12.0 / np.sqrt(kk))
    # index of the narrowest ladder range that still covers `wanted`
    rung = np.searchsorted(-_LADDER_XMAX, -wanted, side="right") - 1
    rung = np.clip(rung, 0, _LADDER_XMAX.size - 1)
    target = level * np.pi * special.i0e(kk)  # half of level * 2 pi i0e(k)
    res = np.empty_like(kk)
    for j in np.unique(rung):
        rows = np.nonzero(rung == j)[0]
        step = _LADDER_XMAX[j] / QUADRATURE_POINTS
        nodes = _LADDER_X[j, ::2]
        for start in range(0, rows.size, 2048):
            sel = rows[start:start + 2048]
            f = np.exp(kk[sel, None] * _LADDER_COSM1[j][None, :])
            # Simpson panels over pairs of sub-intervals -> cumulative at even nodes
            panels = (f[:, 0:-1:2] + 4.0 * f[:, 1::2] + f[:, 2::2]) * (step / 3.0)
            cum = np.concatenate([np.zeros((sel.size, 1)), np.cumsum(panels, axis=1)], axis=1)
            tg = target[sel]
            # cum is non-decreasing along each row, so counting is a row-wise bisection
            idx = np.clip((cum < tg[:, None]).sum(axis=1), 1, cum.shape[1] - 1)
            r = np.arange(sel.size)
            c0, c1 = cum[r, idx - 1], cum[r, idx]
            x0, x1 = nodes[idx - 1], nodes[idx]
            frac = np.where(c1 > c0, (tg - c0) / np.where(c1 > c0, c1 - c0, 1.0), 1.0)
            h = x0 + np.clip(frac, 0.0, 1.0) * (x1 - x0)
            # polish with Newton steps on a local Simpson panel [x0, h]
            k = kk[sel]
            f0 = f[r, 2 * (idx - 1)]
            for _ in range(2):
                fm = np.exp(-2.0 * k * np.sin(0.25 * (x0 + h)) ** 2)
                fh = np.exp(-2.0 * k * np.sin(0.5 * h) ** 2)
                mass = c0 + (h - x0) / 6.0 * (f0 + 4.0 * fm + fh)
                h = np.clip(h - (mass - tg) / fh, x0, x1)
            # target beyond the truncated range: treat as uninformative
            res[sel] = np.where(tg > cum[:, -1], np.pi, h)
    return res


# ---------------------------------------------------------------- public fits


def fit_lognormal(speeds):
    """Maximum-likelihood log-normal fit to wind speeds.

    Calm samples (below 1e-6 m/s) are dropped; the rest are clamped to at
    least 1e-4 m/s before taking logs.  A zero spread is floored at 1e-9.

    Raises
    ------
    DegenerateDistributionError
        If fewer than two non-calm samples remain.
    """
    w = np.asarray(speeds, dtype=float).ravel()
    valid = w >= CALM_SPEED
    if valid.sum() < 2:
        raise DegenerateDistributionError("fewer than two non-calm wind speed samples")
    mu, sigma, _ = _lognormal_kernel(w, valid)
    return SpeedDistribution(float(mu), float(sigma))


def fit_vonmises(directions):
    """Von Mises fit: circular mean plus kappa from the mean resultant length.

    NaN entries (calm samples) are ignored.
    """
    th = np.asarray(directions, dtype=float).ravel()
    valid = np.isfinite(th)
    if valid.sum() < 2:
        raise DegenerateDistributionError("fewer than two usable direction samples")
    mu, kappa, _ = _vonmises_kernel(th, valid)
    return DirectionDistribution(float(mu), float(kappa))


def speed_ci(dist, level=DEFAULT_LEVEL):
    """Equal-tailed log-normal interval for wind speed."""
    _check_level(level)
    z = stats.norm.ppf(0.5 * (1.0 + level))
    return ConfidenceInterval(
        float(np.exp(dist.log_mu - z * dist.log_sigma)),
        float(np.exp(dist.log_mu + z * dist.log_sigma)),
        level,
    )


def direction_ci(dist, level=DEFAULT_LEVEL):
    """Symmetric circular interval around the von Mises mean direction."""
    _check_level(level)
    if dist.kappa <= KAPPA_FLOOR:
        return ConfidenceInterval(0.0, 0.0, level, circular=True, full_circle=True)
    h = vonmises_half_width(dist.kappa, level)
    if h >= np.pi:
        return ConfidenceInterval(0.0, 0.0, level, circular=True, full_circle=True)
    return ConfidenceInterval(
        float((dist.mu_rad - h) % TWO_PI),
        float((dist.mu_rad + h) % TWO_PI),
        level,
        circular=True,
    )


def temperature_ci(fc, level=DEFAULT_LEVEL):
    _check_level(level)
    z = stats.norm.ppf(0.5 * (1.0 + level))
    return ConfidenceInterval(fc.mean_c - z * fc.std_c, fc.mean_c + z * fc.std_c, level)


def azimuth_interval(dir_ci):
    """Re-express a direction CI (from :func:`direction_ci`) as compass azimuths.

    The angle-to-azimuth map reverses orientation, so the endpoints swap.
    The result is in radians, suitable for :func:`minimal_attack_angle`.
    """
    if dir_ci.full_circle:
        return dir_ci
    lo = np.radians(direction_to_azimuth(dir_ci.upper))
    hi = np.radians(direction_to_azimuth(dir_ci.lower))
    return ConfidenceInterval(float(lo), float(hi), dir_ci.level, circular=True)


def minimal_attack_angle_array(lower_deg, width_deg, bearing_deg, full_circle=False):
    """Vectorised smallest attack angle over compass arcs.

    Each arc starts at ``lower_deg`` and extends clockwise by ``width_deg``.
    The span axis is bidirectional, so both ``bearing`` and ``bearing + 180``
    count; if either lies on the arc the result is 0.
    """
    lo = np.mod(np.asarray(lower_deg, dtype=float), 360.0)
    width = np.asarray(width_deg, dtype=float)
    b = np.mod(np.asarray(bearing_deg, dtype=float), 360.0)
    full = np.asarray(full_circle, dtype=bool) | (width >= 360.0)

    inside = np.zeros(np.broadcast(lo, width, b).shape, dtype=bool)
    for axis in (b, b + 180.0):
        inside |= np.mod(axis - lo, 360.0) <= width

    def fold(a, c):
        d = np.mod(np.abs(a - c), 180.0)
        return np.minimum(d, 180.0 - d)

    # away from the axis the folded angle is a triangle wave, so its minimum
    # over the arc sits at one of the two ends
    ends = np.minimum(fold(lo, b), fold(lo + width, b))
    out = np.where(inside | full, 0.0, ends)
    return float(out) if out.ndim == 0 else out


def minimal_attack_angle(dir_ci, span_bearing_deg):
    """Smallest wind-to-span attack angle, in degrees, over a direction CI.

    Parameters
    ----------
    dir_ci : ConfidenceInterval
        Circular interval in radians, compass convention (use
        :func:`azimuth_interval` on the output of :func:`direction_ci`).
    span_bearing_deg : float
        Compass bearing of the span, degrees.
    """
    if not 0.0 <= span_bearing_deg < 360.0:
        raise InvalidInputError("bearing must lie in [0, 360)")
    return minimal_attack_angle_array(
        np.degrees(dir_ci.lower),
        np.degrees(dir_ci.width),
        span_bearing_deg,
        dir_ci.full_circle,
    )


# ---------------------------------------------------------------- batch


@dataclass
class WindIntervals:
    """Per-forecast Monte Carlo summaries; every field is an ndarray of length M."""

    speed_lower: np.ndarray
    speed_upper: np.ndarray
    log_mu: np.ndarray
    log_sigma: np.ndarray
    dir_mu: np.ndarray
    kappa: np.ndarray
    half_width: np.ndarray
    full_circle: np.ndarray
    calm_fraction: np.ndarray
    degenerate: np.ndarray

    @property
    def azimuth_lower_deg(self):
        # orientation flips under the azimuth map: the CI's upper angle becomes the lower azimuth
        return np.mod(90.0 - np.degrees(self.dir_mu + self.half_width), 360.0)

    @property
    def azimuth_width_deg(self):
        return np.where(self.full_circle, 360.0, np.degrees(2.0 * self.half_width))


def wind_intervals_batch(u_mean, u_std, v_mean, v_std, seeds, n=DEFAULT_SAMPLES,
                         level=DEFAULT_LEVEL, chunk=512):
    """Monte Carlo wind CIs for M forecasts.

    Parameters
    ----------
    u_mean, u_std, v_mean, v_std : array_like, shape (M,)
    seeds : sequence of int, length M
        One seed per forecast; row ``i`` reproduces ``sample_wind`` with
        ``seeds[i]``.
    n : int
        Monte Carlo samples per forecast.
    level : float
        Confidence level.

    Returns
    -------
    WindIntervals
    """
    if n < 2:
        raise InvalidInputError("need at least 2 Monte Carlo samples")
    _check_level(level)
    um, us, vm, vs = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (u_mean, u_std, v_mean, v_std))
    if np.any(us < 0) or np.any(vs < 0):
        raise InvalidInputError("standard deviations must be >= 0")
    m = um.size
    seeds = list(seeds)
    if len(seeds) != m:
        raise InvalidInputError("one seed per forecast required")
    z_hi = stats.norm.ppf(0.5 * (1.0 + level))

    log_mu = np.empty(m)
    log_sigma = np.empty(m)
    dir_mu = np.empty(m)
    kappa = np.empty(m)
    calm_frac = np.empty(m)
    degenerate = np.zeros(m, dtype=bool)
    for start in range(0, m, chunk):
        sl = slice(start, min(m, start + chunk))
        z = np.stack([_standard_normals(s, n) for s in seeds[sl]])
        u = um[sl, None] + us[sl, None] * z[:, 0, :]
        v = vm[sl, None] + vs[sl, None] * z[:, 1, :]
        w = np.hypot(u, v)
        moving = w >= CALM_SPEED
        mu_w, sig_w, cnt = _lognormal_kernel(w, moving)
        # cos/sin of atan2(v, u) + pi are -u/w and -v/w
        inv = np.where(moving, -1.0 / np.where(moving, w, 1.0), 0.0)
        mu_d, k_d = _vonmises_from_moments(u * inv, v * inv, cnt)
        log_mu[sl], log_sigma[sl] = mu_w, sig_w
        dir_mu[sl], kappa[sl] = mu_d, k_d
        calm_frac[sl] = 1.0 - cnt / n
        degenerate[sl] = (cnt < 2) | (sig_w <= LOG_SIGMA_FLOOR)

    full = (calm_frac > CALM_FRACTION_LIMIT) | (kappa <= KAPPA_FLOOR)
    half = np.full(m, np.pi)
    need = ~full
    if np.any(need):
        half[need] = vonmises_half_width(kappa[need], level)
    full = full | (half >= np.pi)
    return WindIntervals(
        speed_lower=np.exp(log_mu - z_hi * log_sigma),
        speed_upper=np.exp(log_mu + z_hi * log_sigma),
        log_mu=log_mu,
        log_sigma=log_sigma,
        dir_mu=dir_mu,
        kappa=kappa,
        half_width=half,
        full_circle=full,
        calm_fraction=calm_frac,
        degenerate=degenerate,
    )


def wind_intervals(fc, n=DEFAULT_SAMPLES, seed=None, level=DEFAULT_LEVEL):
    """Speed CI and direction CI for a single forecast.

    Returns ``(speed_ci, direction_ci)``; raises
    :class:`DegenerateDistributionError` if the speed sample is a point mass
    or almost entirely calm.
    """
    uv = sample_wind(fc, n, seed)
    w, theta, calm = speed_and_direction(uv[:, 0], uv[:, 1])
    sdist = fit_lognormal(w)
    if sdist.is_point_mass:
        raise DegenerateDistributionError("wind speed sample has no spread")
    if calm.mean() > CALM_FRACTION_LIMIT:
        dci = ConfidenceInterval(0.0, 0.0, level, circular=True, full_circle=True)
    else:
        dci = direction_ci(fit_vonmises(theta), level)
    return speed_ci(sdist, level), dci
