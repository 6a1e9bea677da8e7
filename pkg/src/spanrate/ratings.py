"""Span ratings, line aggregation and hotspot statistics.

For each (span, hour) five ratings can be produced:

``SR``
    fixed conservative weather, constant in time
``AAR``
    SR weather with the forecast ambient temperature
``DLR_MEAN``
    forecast mean wind, direction and ambient
``DLR_LOWER``
    lower speed bound, minimal attack angle over the direction CI,
    upper ambient bound
``DLR_UPPER``
    upper speed bound, perpendicular wind, lower ambient bound

DLR inputs are floored (0.61 m/s, 25 degrees) after the CI bounds are
resolved.  A line's rating for an hour is the minimum over its spans.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import pandas as pd
from scipy import stats

from . import geometry, solar, stochastic, thermal
from .exceptions import InvalidInputError

log = logging.getLogger(__name__)


class RatingVariant(str, Enum):
    SR = "SR"
    AAR = "AAR"
    DLR_MEAN = "DLR_MEAN"
    DLR_LOWER = "DLR_LOWER"
    DLR_UPPER = "DLR_UPPER"

    def __str__(self):
        return self.value


ALL_VARIANTS = tuple(RatingVariant)
DLR_VARIANTS = (RatingVariant.DLR_MEAN, RatingVariant.DLR_LOWER, RatingVariant.DLR_UPPER)

SPAN_COLUMNS = [
    "span_id", "timestamp", "variant", "ampacity_a",
    "eff_wind_ms", "eff_angle_deg", "eff_ambient_c", "irradiance_wm2",
]
LINE_COLUMNS = ["timestamp", "variant", "ampacity_a", "limiting_span_id"]


def parse_variants(variants):
    """Accept enum members, names or a comma-separated string."""
    if variants is None:
        return ALL_VARIANTS
    if isinstance(variants, str):
        variants = [v for v in variants.split(",") if v.strip()]
    out = []
    for v in variants:
        try:
            member = v if isinstance(v, RatingVariant) else RatingVariant(str(v).strip().upper())
        except ValueError:
            raise InvalidInputError(f"unknown rating variant {v!r}") from None
        if member not in out:
            out.append(member)
    if not out:
        raise InvalidInputError("no rating variants requested")
    # canonical order keeps outputs independent of how the list was typed
    return tuple(v for v in ALL_VARIANTS if v in out)


def span_sort_key(span_id):
    """Natural ordering for span ids: numeric ids compare as numbers."""
    s = str(span_id)
    return (0, int(s), s) if s.isdigit() else (1, 0, s)


@dataclass(frozen=True)
class Span:
    id: str
    start: tuple
    end: tuple
    elevation_m: float
    max_temp_c: float
    conductor: thermal.Conductor
    bearing_deg: float = None

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "start", tuple(float(x) for x in self.start))
        object.__setattr__(self, "end", tuple(float(x) for x in self.end))
        object.__setattr__(self, "elevation_m", float(self.elevation_m))
        object.__setattr__(self, "max_temp_c", float(self.max_temp_c))
        if not self.max_temp_c > -60:
            raise InvalidInputError(f"span {self.id}: max_temp_c must exceed -60")
        derived = geometry.span_bearing(self.start, self.end)
        if self.bearing_deg is None:
            object.__setattr__(self, "bearing_deg", float(derived))
        else:
            b = float(self.bearing_deg) % 360.0
            b = 0.0 if b >= 360.0 else b
            if geometry.angular_difference_deg(b, derived) > 0.5:
                raise InvalidInputError(
                    f"span {self.id}: bearing {b:.2f} disagrees with endpoints ({derived:.2f})"
                )
            object.__setattr__(self, "bearing_deg", b)

    @property
    def midpoint(self):
        return geometry.midpoint(self.start, self.end)


@dataclass(frozen=True)
class Line:
    id: str
    spans: tuple

    def __post_init__(self):
        spans = tuple(self.spans)
        if not spans:
            raise InvalidInputError("a line needs at least one span")
        ids = [s.id for s in spans]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("duplicate span ids in line")
        object.__setattr__(self, "spans", spans)

    def span(self, span_id):
        for s in self.spans:
            if s.id == str(span_id):
                return s
        raise KeyError(span_id)

    def with_max_temps(self, max_temp_c):
        """Copy of the line with every span limited to ``max_temp_c``."""
        return Line(self.id, tuple(replace(s, max_temp_c=max_temp_c) for s in self.spans))


@dataclass(frozen=True)
class FixedWeather:
    wind_ms: float = 0.61
    attack_angle_deg: float = 90.0
    irradiance_wm2: float = 1033.0
    ambient_c: float = 25.0


@dataclass
class RunConfig:
    """Run parameters; SR/AAR defaults are the usual conservative assumptions."""

    confidence_level: float = stochastic.DEFAULT_LEVEL
    mc_samples: int = stochastic.DEFAULT_SAMPLES
    base_seed: int = 0
    wind_floor_ms: float = 0.61
    angle_floor_deg: float = 25.0
    sr: FixedWeather = field(default_factory=FixedWeather)
    aar: FixedWeather = field(default_factory=FixedWeather)
    period_start: str = None
    period_end: str = None
    variants: tuple = ALL_VARIANTS
    conductor_catalog: str = None

    def __post_init__(self):
        if not 0 < self.confidence_level < 1:
            raise InvalidInputError("confidence_level must lie in (0, 1)")
        if int(self.mc_samples) < 2:
            raise InvalidInputError("mc_samples must be >= 2")
        if self.wind_floor_ms < 0 or self.angle_floor_deg < 0:
            raise InvalidInputError("floors must be >= 0")
        if self.angle_floor_deg > 90:
            raise InvalidInputError("angle floor cannot exceed 90 degrees")
        self.mc_samples = int(self.mc_samples)
        self.variants = parse_variants(self.variants)


@dataclass(frozen=True)
class WeatherPrediction:
    """Forecast for one span and hour (means and standard deviations)."""

    span_id: str
    timestamp: np.datetime64
    u_mean: float
    u_std: float
    v_mean: float
    v_std: float
    t_mean: float
    t_std: float
    lead_time_h: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "span_id", str(self.span_id))
        object.__setattr__(self, "timestamp", np.datetime64(self.timestamp, "s"))
        if min(self.u_std, self.v_std, self.t_std) < 0:
            raise InvalidInputError("standard deviations must be >= 0")


@dataclass(frozen=True)
class SpanRating:
    span_id: str
    timestamp: np.datetime64
    variant: RatingVariant
    ampacity_a: float
    eff_wind_ms: float
    eff_angle_deg: float
    eff_ambient_c: float
    irradiance_wm2: float
    degenerate: bool = False


@dataclass(frozen=True)
class LineRating:
    timestamp: np.datetime64
    variant: RatingVariant
    ampacity_a: float
    limiting_span_id: str


# ------------------------------------------------------------------ fixed ratings


def _fixed_ampacity(span, weather, ambient_c):
    amb = thermal.AmbientConditions(
        wind_speed_ms=weather.wind_ms,
        attack_angle_deg=weather.attack_angle_deg,
        ambient_temp_c=ambient_c,
        irradiance_wm2=weather.irradiance_wm2,
        elevation_m=span.elevation_m,
    )
    return thermal.solve_ampacity(span.conductor, amb, span.max_temp_c)


def static_rating(span, sr_config=None):
    """Time-invariant rating under fixed conservative weather (amperes)."""
    sr = sr_config or FixedWeather()
    return _fixed_ampacity(span, sr, sr.ambient_c)


def ambient_adjusted_rating(span, ambient_c, aar_config=None):
    """SR weather with the actual ambient temperature substituted (amperes)."""
    aar = aar_config or FixedWeather()
    return _fixed_ampacity(span, aar, ambient_c)


# ------------------------------------------------------------------ dynamic ratings


def mean_attack_angle(u_mean, v_mean, bearing_deg):
    """Attack angle (deg) of the mean wind vector; 0 for an exactly calm mean."""
    u = np.asarray(u_mean, dtype=float)
    v = np.asarray(v_mean, dtype=float)
    _, theta, calm = stochastic.speed_and_direction(u, v)
    az = stochastic.direction_to_azimuth(np.where(calm, 0.0, theta))
    angle = thermal.fold_attack_angle(np.asarray(az) - bearing_deg)
    return np.where(calm, 0.0, angle)


def resolve_dlr_inputs(span, times, u_mean, u_std, v_mean, v_std, t_mean, t_std, config):
    """Effective DLR inputs for one span over many hours.

    Returns a dict keyed by variant; each value is a dict of arrays
    ``wind``, ``angle``, ``ambient`` plus a shared ``degenerate`` mask and
    ``irradiance`` array.
    """
    u_mean, u_std, v_mean, v_std, t_mean, t_std = (
        np.atleast_1d(np.asarray(a, dtype=float)) for a in (u_mean, u_std, v_mean, v_std, t_mean, t_std)
    )
    times = np.atleast_1d(np.asarray(times, dtype="datetime64[s]"))
    level = config.confidence_level
    lat, lon = span.midpoint
    irradiance = solar.irradiance_series(times, lat, lon)

    seeds = [
        stochastic.task_seed(config.base_seed, span.id, str(t) + "Z") for t in times
    ]
    wi = stochastic.wind_intervals_batch(
        u_mean, u_std, v_mean, v_std, seeds, n=config.mc_samples, level=level
    )
    z = stats.norm.ppf(0.5 * (1.0 + level))
    t_lo, t_hi = t_mean - z * t_std, t_mean + z * t_std

    mean_speed = np.hypot(u_mean, v_mean)
    mean_angle = mean_attack_angle(u_mean, v_mean, span.bearing_deg)
    min_angle = stochastic.minimal_attack_angle_array(
        wi.azimuth_lower_deg, wi.azimuth_width_deg, span.bearing_deg, wi.full_circle
    )
    deg = wi.degenerate

    # the bounds are kept on the conservative/optimistic side of the mean inputs,
    # which the log-normal quantiles do not guarantee when spread >> mean speed
    lower_speed = np.where(deg, mean_speed, np.minimum(wi.speed_lower, mean_speed))
    lower_angle = np.where(deg, mean_angle, np.minimum(min_angle, mean_angle))
    upper_speed = np.where(deg, mean_speed, np.maximum(wi.speed_upper, mean_speed))
    upper_angle = np.where(deg, mean_angle, 90.0)

    raw = {
        RatingVariant.DLR_MEAN: (mean_speed, mean_angle, t_mean),
        RatingVariant.DLR_LOWER: (lower_speed, lower_angle, t_hi),
        RatingVariant.DLR_UPPER: (upper_speed, upper_angle, t_lo),
    }
    resolved = {}
    for variant, (w, a, t) in raw.items():
        resolved[variant] = {
            "wind": np.maximum(w, config.wind_floor_ms),
            "angle": np.maximum(a, config.angle_floor_deg),
            "ambient": np.asarray(t, dtype=float),
        }
    resolved["degenerate"] = deg
    resolved["irradiance"] = irradiance
    return resolved


def _dlr_ampacity(span, inputs, irradiance):
    amb = thermal.AmbientConditions(
        wind_speed_ms=inputs["wind"],
        attack_angle_deg=inputs["angle"],
        ambient_temp_c=inputs["ambient"],
        irradiance_wm2=irradiance,
        elevation_m=span.elevation_m,
    )
    return np.atleast_1d(thermal.solve_ampacity(span.conductor, amb, span.max_temp_c))


def dynamic_rating(span, pred, variant, level=stochastic.DEFAULT_LEVEL,
                   n=stochastic.DEFAULT_SAMPLES, seed=0, config=None):
    """Rate one span for one forecast hour.

    ``seed`` is the run's base seed; the per-task seed is derived from it,
    the span id and the timestamp, so this matches :func:`rate_line`.
    Degenerate wind samples (no spread) fall back to the mean inputs and set
    ``degenerate`` on the record.
    """
    variant = RatingVariant(variant)
    if variant not in DLR_VARIANTS:
        raise InvalidInputError(f"{variant} is not a DLR variant")
    cfg = config or RunConfig()
    cfg = replace(cfg, confidence_level=level, mc_samples=n, base_seed=seed)
    res = resolve_dlr_inputs(
        span, [pred.timestamp], pred.u_mean, pred.u_std, pred.v_mean, pred.v_std,
        pred.t_mean, pred.t_std, cfg,
    )
    inputs = res[variant]
    amp = _dlr_ampacity(span, inputs, res["irradiance"])
    return SpanRating(
        span_id=span.id,
        timestamp=np.datetime64(pred.timestamp, "s"),
        variant=variant,
        ampacity_a=float(amp[0]),
        eff_wind_ms=float(inputs["wind"][0]),
        eff_angle_deg=float(inputs["angle"][0]),
        eff_ambient_c=float(inputs["ambient"][0]),
        irradiance_wm2=float(res["irradiance"][0]),
        degenerate=bool(res["degenerate"][0]),
    )


def rate_span_series(span, times, pred, variants, config):
    """All requested variants for one span over aligned hourly forecasts.

    ``pred`` maps ``u_mean, u_std, v_mean, v_std, t_mean, t_std`` to arrays
    aligned with ``times``.  Returns a DataFrame with :data:`SPAN_COLUMNS`
    plus a ``degenerate`` flag.
    """
    times = np.asarray(times, dtype="datetime64[s]")
    h = times.size
    frames = []

    def frame(variant, amp, wind, angle, ambient, irr, degen):
        return pd.DataFrame({
            "span_id": span.id,
            "timestamp": times,
            "variant": variant.value,
            "ampacity_a": np.broadcast_to(amp, h).astype(float),
            "eff_wind_ms": np.broadcast_to(wind, h).astype(float),
            "eff_angle_deg": np.broadcast_to(angle, h).astype(float),
            "eff_ambient_c": np.broadcast_to(ambient, h).astype(float),
            "irradiance_wm2": np.broadcast_to(irr, h).astype(float),
            "degenerate": np.broadcast_to(degen, h).astype(bool),
        })

    t_mean = np.asarray(pred["t_mean"], dtype=float)
    if RatingVariant.SR in variants:
        sr = config.sr
        frames.append(frame(RatingVariant.SR, static_rating(span, sr), sr.wind_ms,
                            sr.attack_angle_deg, sr.ambient_c, sr.irradiance_wm2, False))
    if RatingVariant.AAR in variants:
        aar = config.aar
        frames.append(frame(RatingVariant.AAR, ambient_adjusted_rating(span, t_mean, aar),
                            aar.wind_ms, aar.attack_angle_deg, t_mean, aar.irradiance_wm2, False))
    wanted = [v for v in DLR_VARIANTS if v in variants]
    if wanted:
        res = resolve_dlr_inputs(
            span, times, pred["u_mean"], pred["u_std"], pred["v_mean"], pred["v_std"],
            t_mean, pred["t_std"], config,
        )
        for v in wanted:
            inp = res[v]
            amp = _dlr_ampacity(span, inp, res["irradiance"])
            frames.append(frame(v, amp, inp["wind"], inp["angle"], inp["ambient"],
                                res["irradiance"], res["degenerate"]))
    return pd.concat(frames, ignore_index=True)


# ------------------------------------------------------------------ line level


@dataclass
class RatingResult:
    span_ratings: pd.DataFrame
    line_ratings: pd.DataFrame
    gaps: dict = field(default_factory=dict)

    @property
    def hours(self):
        return int(self.line_ratings["timestamp"].nunique()) if len(self.line_ratings) else 0


def aggregate_line(span_ratings, span_order=None):
    """Per-hour, per-variant minimum over spans with its arg-min span.

    Ties go to the lowest span id (numeric ids compare numerically).
    """
    if span_ratings.empty:
        return pd.DataFrame(columns=LINE_COLUMNS)
    ids = span_order or sorted(span_ratings["span_id"].unique(), key=span_sort_key)
    ids = sorted(ids, key=span_sort_key)
    rows = []
    for variant, grp in span_ratings.groupby("variant", sort=False):
        wide = grp.pivot(index="timestamp", columns="span_id", values="ampacity_a")
        wide = wide.reindex(columns=[i for i in ids if i in wide.columns])
        values = wide.to_numpy()
        if np.isnan(values).any():
            raise InvalidInputError(f"{variant}: span ratings missing for some hours")
        # argmin returns the first minimum, i.e. the lowest id after sorting
        arg = values.argmin(axis=1)
        rows.append(pd.DataFrame({
            "timestamp": wide.index.to_numpy(),
            "variant": variant,
            "ampacity_a": values[np.arange(len(arg)), arg],
            "limiting_span_id": np.asarray(wide.columns)[arg],
        }))
    out = pd.concat(rows, ignore_index=True)
    order = {v.value: i for i, v in enumerate(ALL_VARIANTS)}
    out["_v"] = out["variant"].map(order)
    out = out.sort_values(["timestamp", "_v"], kind="stable").drop(columns="_v")
    return out.reset_index(drop=True)


def _hour_range(period, available):
    if period is not None and period[0] is not None and period[1] is not None:
        start = np.datetime64(str(period[0]).rstrip("Z"), "h")
        end = np.datetime64(str(period[1]).rstrip("Z"), "h")
        if end < start:
            raise InvalidInputError("period end precedes start")
        return np.arange(start, end + np.timedelta64(1, "h"), np.timedelta64(1, "h")).astype("datetime64[s]")
    if len(available) == 0:
        return np.array([], dtype="datetime64[s]")
    hours = np.asarray(available, dtype="datetime64[s]")
    return np.arange(hours.min(), hours.max() + np.timedelta64(1, "h"), np.timedelta64(3600, "s"))


def _rate_span_task(args):
    span, times, pred, variants, config = args
    return rate_span_series(span, times, pred, variants, config)


def resolve_workers(workers=None):
    """Worker count from an explicit value or ``SPANRATE_THREADS`` (unset or 0 = auto)."""
    if workers is None:
        raw = os.environ.get("SPANRATE_THREADS", "0")
        try:
            workers = int(raw)
        except ValueError:
            raise InvalidInputError(f"SPANRATE_THREADS must be an integer, got {raw!r}") from None
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def rate_line(line, predictions, variants=None, period=None, config=None, workers=1):
    """Rate every span of ``line`` for every complete hour.

    Parameters
    ----------
    line : Line
    predictions : pandas.DataFrame
        Columns ``span_id, timestamp, u_mean, u_std, v_mean, v_std, t_mean,
        t_std``; one row per (span, hour).
    variants : iterable, optional
        Defaults to ``config.variants``.
    period : (start, end), optional
        Inclusive hour range; defaults to the config period, then to the
        span of timestamps present in ``predictions``.
    config : RunConfig, optional
    workers : int
        Process count for per-span work.  Output does not depend on it.

    Returns
    -------
    RatingResult
        ``gaps`` maps each skipped hour to the span ids lacking a forecast.
    """
    config = config or RunConfig()
    variants = parse_variants(variants if variants is not None else config.variants)
    if period is None and config.period_start and config.period_end:
        period = (config.period_start, config.period_end)

    preds = predictions.copy()
    preds["span_id"] = preds["span_id"].astype(str)
    preds["timestamp"] = pd.to_datetime(preds["timestamp"], utc=True).dt.tz_localize(None).astype("datetime64[s]")
    hours = _hour_range(period, preds["timestamp"].to_numpy())
    span_ids = [s.id for s in line.spans]
    preds = preds[preds["span_id"].isin(span_ids) & preds["timestamp"].isin(hours)]

    present = preds.groupby("timestamp")["span_id"].agg(set)
    gaps = {}
    for h in hours:
        have = present.get(pd.Timestamp(h), set())
        missing = [sid for sid in span_ids if sid not in have]
        if missing:
            gaps[np.datetime64(h, "s")] = missing
    if gaps:
        log.warning("%d hour(s) skipped for missing forecasts", len(gaps))
    complete = np.array([h for h in hours if np.datetime64(h, "s") not in gaps], dtype="datetime64[s]")

    tasks = []
    indexed = preds.set_index(["span_id", "timestamp"]).sort_index()
    cols = ["u_mean", "u_std", "v_mean", "v_std", "t_mean", "t_std"]
    for span in line.spans:
        if complete.size == 0:
            break
        sub = indexed.loc[span.id].reindex(pd.DatetimeIndex(complete))
        pred = {c: sub[c].to_numpy(dtype=float) for c in cols}
        tasks.append((span, complete, pred, variants, config))

    if not tasks:
        empty = pd.DataFrame(columns=SPAN_COLUMNS + ["degenerate"])
        return RatingResult(empty, pd.DataFrame(columns=LINE_COLUMNS), gaps)

    workers = max(1, min(resolve_workers(workers), len(tasks)))
    if workers == 1:
        frames = [_rate_span_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            frames = list(pool.map(_rate_span_task, tasks))

    span_df = pd.concat(frames, ignore_index=True)
    order = {v.value: i for i, v in enumerate(ALL_VARIANTS)}
    pos = {sid: i for i, sid in enumerate(span_ids)}
    span_df["_v"] = span_df["variant"].map(order)
    span_df["_s"] = span_df["span_id"].map(pos)
    span_df = (
        span_df.sort_values(["timestamp", "_s", "_v"], kind="stable")
        .drop(columns=["_v", "_s"])
        .reset_index(drop=True)
    )
    line_df = aggregate_line(span_df, span_ids)
    return RatingResult(span_df, line_df, gaps)


# ------------------------------------------------------------------ analysis


def _line_frame(line_ratings):
    if isinstance(line_ratings, pd.DataFrame):
        return line_ratings
    return pd.DataFrame(
        [(r.timestamp, str(r.variant), r.ampacity_a, r.limiting_span_id) for r in line_ratings],
        columns=LINE_COLUMNS,
    )


def hotspot_analysis(line_ratings, span_ids=None):
    """How often each span limits the line, per variant.

    Returns a DataFrame ``span_id, variant, hours_limiting, fraction``.
    When ``span_ids`` is given, spans that never limit are listed with zero.
    """
    df = _line_frame(line_ratings)
    if df.empty:
        raise InvalidInputError("hotspot analysis needs at least one line rating")
    df = df.assign(limiting_span_id=df["limiting_span_id"].astype(str))
    rows = []
    order = {v.value: i for i, v in enumerate(ALL_VARIANTS)}
    for variant in sorted(df["variant"].unique(), key=lambda v: order.get(v, 99)):
        grp = df[df["variant"] == variant]
        counts = grp["limiting_span_id"].value_counts()
        ids = list(span_ids) if span_ids is not None else list(counts.index)
        ids = sorted({str(i) for i in ids} | set(counts.index), key=span_sort_key)
        total = len(grp)
        for sid in ids:
            n = int(counts.get(sid, 0))
            rows.append((sid, variant, n, n / total))
    return pd.DataFrame(rows, columns=["span_id", "variant", "hours_limiting", "fraction"])


def compare_variants(span_ratings, rtol=0.0):
    """Check ``DLR_LOWER <= DLR_MEAN <= DLR_UPPER`` for every (span, hour).

    Returns a list of violation dicts; empty when the ordering holds.
    """
    if isinstance(span_ratings, pd.DataFrame):
        df = span_ratings
    else:
        df = pd.DataFrame(
            [(r.span_id, r.timestamp, str(r.variant), r.ampacity_a) for r in span_ratings],
            columns=["span_id", "timestamp", "variant", "ampacity_a"],
        )
    names = ["DLR_LOWER", "DLR_MEAN", "DLR_UPPER"]
    sub = df[df["variant"].isin(names)]
    wide = sub.pivot_table(index=["span_id", "timestamp"], columns="variant",
                           values="ampacity_a", aggfunc="first")
    missing = [n for n in names if n not in wide.columns]
    if missing:
        raise InvalidInputError(f"ratings lack variant(s): {', '.join(missing)}")
    wide = wide.dropna()
    lo, mid, hi = (wide[n].to_numpy() for n in names)
    slack = rtol * np.abs(mid)
    bad = (lo > mid + slack) | (mid > hi + slack)
    out = []
    for (sid, ts), l, m, u in zip(wide.index[bad], lo[bad], mid[bad], hi[bad]):
        out.append({"span_id": sid, "timestamp": ts, "DLR_LOWER": l, "DLR_MEAN": m, "DLR_UPPER": u})
    return out
