import numpy as np
import pandas as pd
import pytest

from spanrate import ratings, thermal
from spanrate.exceptions import InvalidInputError
from spanrate.model_io import load_conductor_catalog
from spanrate.ratings import FixedWeather, Line, RatingVariant, RunConfig, Span, WeatherPrediction
from spanrate.synthetic import synthetic_line, synthetic_predictions

COND = load_conductor_catalog()["ACSR242"]


def make_span(sid="1", start=(59.0, 24.0), end=(59.0, 24.01), max_temp=80.0, elev=0.0):
    return Span(sid, start, end, elev, max_temp, COND)


def pred(span_id="1", ts="2023-06-01T12:00:00", u=(3.0, 1.0), v=(1.0, 1.0), t=(15.0, 2.0)):
    return WeatherPrediction(span_id, np.datetime64(ts), u[0], u[1], v[0], v[1], t[0], t[1])


def test_span_derives_and_checks_bearing():
    s = make_span()
    assert s.bearing_deg == pytest.approx(90.0, abs=0.01)
    with pytest.raises(InvalidInputError):
        Span("1", (59.0, 24.0), (59.0, 24.01), 0.0, 80.0, COND, bearing_deg=10.0)


def test_parse_variants_canonical_order():
    assert ratings.parse_variants("dlr_upper,SR") == (RatingVariant.SR, RatingVariant.DLR_UPPER)
    with pytest.raises(InvalidInputError):
        ratings.parse_variants("SR,BOGUS")


def test_span_sort_key_numeric_first():
    assert sorted(["10", "2", "b", "1", "a"], key=ratings.span_sort_key) == ["1", "2", "10", "a", "b"]


def test_sr_matches_direct_heat_balance():
    s = make_span()
    amb = thermal.AmbientConditions(0.61, 90.0, 25.0, 1033.0, 0.0)
    assert ratings.static_rating(s) == thermal.solve_ampacity(COND, amb, 80.0)


def test_aar_equals_sr_at_reference_ambient():
    s = make_span()
    assert ratings.ambient_adjusted_rating(s, 25.0) == pytest.approx(ratings.static_rating(s))
    assert ratings.ambient_adjusted_rating(s, 0.0) > ratings.static_rating(s)


def test_dynamic_rating_matches_series():
    s = make_span()
    p = pred()
    frame = ratings.rate_span_series(
        s, [p.timestamp], {k: [getattr(p, k)] for k in ("u_mean", "u_std", "v_mean", "v_std", "t_mean", "t_std")},
        ratings.ALL_VARIANTS, RunConfig(base_seed=9),
    )
    for v in ratings.DLR_VARIANTS:
        r = ratings.dynamic_rating(s, p, v, seed=9)
        row = frame[frame.variant == v.value].iloc[0]
        assert r.ampacity_a == row.ampacity_a
        assert r.eff_angle_deg == row.eff_angle_deg


def test_dynamic_rating_rejects_fixed_variants():
    with pytest.raises(InvalidInputError):
        ratings.dynamic_rating(make_span(), pred(), "SR")


def test_zero_uncertainty_collapses_dlr_variants():
    s = make_span()
    p = pred(u=(4.0, 0.0), v=(-2.0, 0.0), t=(10.0, 0.0))
    got = {v: ratings.dynamic_rating(s, p, v) for v in ratings.DLR_VARIANTS}
    vals = {r.ampacity_a for r in got.values()}
    assert len(vals) == 1
    assert all(r.degenerate for r in got.values())


@pytest.mark.parametrize("u,v", [(0.0, 0.0), (0.1, 0.05), (0.0, 0.2)])
def test_low_wind_is_floored(u, v):
    s = make_span()
    for variant in ratings.DLR_VARIANTS:
        r = ratings.dynamic_rating(s, pred(u=(u, 0.05), v=(v, 0.05)), variant)
        assert r.eff_wind_ms >= 0.61
        assert r.eff_angle_deg >= 25.0


def test_parallel_wind_angle_is_floored():
    # span runs east-west; wind blowing from the east is parallel to it
    s = make_span()
    r = ratings.dynamic_rating(s, pred(u=(-5.0, 0.0), v=(0.0, 0.0)), "DLR_MEAN")
    assert r.eff_angle_deg == 25.0
    assert r.eff_wind_ms == pytest.approx(5.0)


def test_mean_attack_angle_perpendicular():
    # northerly wind across an east-west span
    assert ratings.mean_attack_angle(0.0, -3.0, 90.0) == pytest.approx(90.0)
    assert ratings.mean_attack_angle(0.0, 0.0, 90.0) == 0.0


def test_variant_ordering_random():
    rng = np.random.default_rng(4)
    s = make_span()
    n = 300
    times = np.datetime64("2023-03-01T00") + np.arange(n).astype("timedelta64[h]")
    p = {
        "u_mean": rng.normal(0, 4, n), "u_std": rng.uniform(0, 3, n),
        "v_mean": rng.normal(0, 4, n), "v_std": rng.uniform(0, 3, n),
        "t_mean": rng.uniform(-20, 30, n), "t_std": rng.uniform(0, 3, n),
    }
    frame = ratings.rate_span_series(s, times, p, ratings.ALL_VARIANTS, RunConfig())
    assert ratings.compare_variants(frame) == []


def test_compare_variants_reports_violation():
    df = pd.DataFrame({
        "span_id": ["1"] * 3, "timestamp": [0] * 3,
        "variant": ["DLR_LOWER", "DLR_MEAN", "DLR_UPPER"], "ampacity_a": [500.0, 400.0, 600.0],
    })
    out = ratings.compare_variants(df)
    assert len(out) == 1 and out[0]["DLR_LOWER"] == 500.0


def _span_frame(values, variant="DLR_MEAN"):
    rows = []
    for h, row in enumerate(values):
        for sid, a in row.items():
            rows.append((sid, np.datetime64("2023-01-01T00") + np.timedelta64(h, "h"), variant, a))
    return pd.DataFrame(rows, columns=["span_id", "timestamp", "variant", "ampacity_a"])


def test_aggregate_min_and_tie_break():
    df = _span_frame([{"10": 500.0, "2": 500.0, "3": 600.0}, {"10": 400.0, "2": 450.0, "3": 600.0}])
    line = ratings.aggregate_line(df)
    assert line.ampacity_a.tolist() == [500.0, 400.0]
    assert line.limiting_span_id.tolist() == ["2", "10"]


def test_rate_line_gaps_and_shape():
    line = synthetic_line(3, seed=1)
    p = synthetic_predictions(line, hours=6, seed=1)
    p = p[~((p.span_id == "2") & (p.timestamp == np.datetime64("2023-01-01T03:00:00")))]
    res = ratings.rate_line(line, p)
    assert list(res.gaps) == [np.datetime64("2023-01-01T03:00:00")]
    assert res.gaps[np.datetime64("2023-01-01T03:00:00")] == ["2"]
    assert len(res.span_ratings) == 3 * 5 * 5
    assert len(res.line_ratings) == 5 * 5
    assert res.hours == 5


def test_rate_line_sr_constant_per_span():
    line = synthetic_line(4, seed=2)
    res = ratings.rate_line(line, synthetic_predictions(line, hours=12), variants="SR")
    assert set(res.span_ratings.variant) == {"SR"}
    assert (res.span_ratings.groupby("span_id").ampacity_a.nunique() == 1).all()


def test_rate_line_independent_of_workers():
    line = synthetic_line(3, seed=3)
    p = synthetic_predictions(line, hours=10, seed=3)
    a = ratings.rate_line(line, p, workers=1)
    b = ratings.rate_line(line, p, workers=2)
    pd.testing.assert_frame_equal(a.span_ratings, b.span_ratings)
    pd.testing.assert_frame_equal(a.line_ratings, b.line_ratings)


def test_period_restricts_hours():
    line = synthetic_line(2, seed=4)
    p = synthetic_predictions(line, hours=24)
    res = ratings.rate_line(line, p, period=("2023-01-01T05:00:00Z", "2023-01-01T07:00:00Z"))
    assert res.hours == 3


def test_resolve_workers_env(monkeypatch):
    monkeypatch.setenv("SPANRATE_THREADS", "3")
    assert ratings.resolve_workers(None) == 3
    monkeypatch.setenv("SPANRATE_THREADS", "0")
    assert ratings.resolve_workers(None) >= 1
    monkeypatch.setenv("SPANRATE_THREADS", "x")
    with pytest.raises(InvalidInputError):
        ratings.resolve_workers(None)


def test_hotspots_single_span_and_alternating():
    one = ratings.aggregate_line(_span_frame([{"1": 10.0}, {"1": 11.0}]))
    h = ratings.hotspot_analysis(one)
    assert h.fraction.tolist() == [1.0]
    alt = ratings.aggregate_line(_span_frame([{"1": 10.0, "2": 11.0} if k % 2 else {"1": 12.0, "2": 11.0}
                                              for k in range(100)]))
    h = ratings.hotspot_analysis(alt, ["1", "2", "3"])
    assert h.set_index("span_id").fraction.to_dict() == {"1": 0.5, "2": 0.5, "3": 0.0}


def test_with_max_temps_lowers_ratings():
    line = synthetic_line(5, seed=5)
    low = line.with_max_temps(min(s.max_temp_c for s in line.spans))
    for a, b in zip(line.spans, low.spans):
        assert ratings.static_rating(a) >= ratings.static_rating(b)


def test_run_config_validation():
    with pytest.raises(InvalidInputError):
        RunConfig(confidence_level=1.0)
    with pytest.raises(InvalidInputError):
        RunConfig(mc_samples=1)
    with pytest.raises(InvalidInputError):
        RunConfig(wind_floor_ms=-1)


def test_custom_sr_block():
    s = make_span()
    windy = FixedWeather(wind_ms=2.0)
    assert ratings.static_rating(s, windy) > ratings.static_rating(s)


def test_line_rejects_duplicates():
    s = make_span()
    with pytest.raises(InvalidInputError):
        Line("x", (s, s))
