"""Synthetic lines and forecasts for demos, tests and benchmarks."""

import numpy as np
import pandas as pd

from .model_io import load_conductor_catalog
from .ratings import Line, Span


def synthetic_line(n_spans=64, start=(59.30, 24.40), span_length_m=350.0, seed=0,
                   conductor="ACSR242", max_temps=None, line_id="synthetic"):
    """A meandering line of ``n_spans`` spans near ``start`` (lat, lon).

    Headings wander randomly so spans see different attack angles.
    ``max_temps`` is a scalar or per-span sequence (default 70-90 C).
    """
    rng = np.random.default_rng(seed)
    cond = load_conductor_catalog()[conductor]
    if max_temps is None:
        max_temps = rng.choice([70.0, 75.0, 80.0, 90.0], size=n_spans)
    max_temps = np.broadcast_to(np.asarray(max_temps, dtype=float), (n_spans,))
    heading = rng.uniform(0, 360)
    lat, lon = start
    spans = []
    for i in range(n_spans):
        heading = (heading + rng.normal(0, 25)) % 360
        dlat = span_length_m * np.cos(np.radians(heading)) / 111_195.0
        dlon = span_length_m * np.sin(np.radians(heading)) / (111_195.0 * np.cos(np.radians(lat)))
        nxt = (lat + dlat, lon + dlon)
        spans.append(Span(
            id=str(i + 1), start=(lat, lon), end=nxt,
            elevation_m=float(rng.uniform(0, 80)),
            max_temp_c=float(max_temps[i]), conductor=cond,
        ))
        lat, lon = nxt
    return Line(line_id, tuple(spans))


def synthetic_predictions(line, start="2023-01-01T00", hours=8760, seed=0,
                          wind_scale=1.0, spread=1.0):
    """Hourly forecasts for every span with seasonal temperature and wind.

    Returns a DataFrame with the prediction-file columns.
    """
    rng = np.random.default_rng(seed)
    times = np.datetime64(start, "h") + np.arange(hours).astype("timedelta64[h]")
    t_h = np.arange(hours)
    day = t_h / 24.0
    temp = 6.0 - 11.0 * np.cos(2 * np.pi * (day - 15) / 365.0) + 4.0 * np.sin(2 * np.pi * (t_h % 24 - 9) / 24.0)
    # slowly varying regional wind from an AR(1) process
    u = np.empty(hours)
    v = np.empty(hours)
    u[0], v[0] = 2.0, 1.0
    noise = rng.normal(0, 0.6, size=(hours, 2))
    for k in range(1, hours):
        u[k] = 0.97 * u[k - 1] + 0.03 * 2.0 + noise[k, 0]
        v[k] = 0.97 * v[k - 1] + 0.03 * 1.0 + noise[k, 1]
    frames = []
    for i, span in enumerate(line.spans):
        local = rng.normal(0, 0.3, size=(hours, 3))
        frames.append(pd.DataFrame({
            "span_id": span.id,
            "timestamp": times.astype("datetime64[s]"),
            "u_mean": wind_scale * (u + local[:, 0]),
            "u_std": spread * rng.uniform(0.3, 1.5, hours),
            "v_mean": wind_scale * (v + local[:, 1]),
            "v_std": spread * rng.uniform(0.3, 1.5, hours),
            "t_mean": temp + local[:, 2] - 0.0065 * span.elevation_m,
            "t_std": spread * rng.uniform(0.3, 2.0, hours),
            "lead_time_h": (t_h % 24) + 1.0,
        }))
    return pd.concat(frames, ignore_index=True)
