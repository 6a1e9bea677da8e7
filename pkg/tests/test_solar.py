from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanrate import solar
from spanrate.exceptions import InvalidInputError

from oracles import almanac_sun, clear_sky_oracle

TALLINN = (59.437, 24.7536)


def test_reference_position_matches_published_spa_case():
    # NREL SPA worked example: zenith 50.11162, azimuth 194.34024 (incl. refraction)
    t = datetime(2003, 10, 17, 19, 30, 30)
    pos = solar.solar_position(t, 39.742476, -105.1786)
    assert abs((90.0 - pos.elevation_deg) - 50.11162) < 0.01
    assert abs(pos.azimuth_deg - 194.34024) < 0.01


def test_matches_independent_almanac():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(2000):
        t = datetime(1955, 1, 1) + timedelta(minutes=int(rng.integers(0, 90 * 525600)))
        lat, lon = rng.uniform(-70, 70), rng.uniform(-180, 180)
        el_ref, az_ref = almanac_sun(t, lat, lon)
        if not 5.0 < el_ref < 80.0:
            continue
        pos = solar.solar_position(t, lat, lon)
        assert abs(pos.elevation_deg - el_ref) < 0.03
        d_az = abs(pos.azimuth_deg - az_ref) % 360.0
        assert min(d_az, 360.0 - d_az) < 0.1
        checked += 1
    assert checked > 500


def test_equator_equinox_noon_is_near_zenith():
    pos = solar.solar_position(datetime(2023, 3, 20, 12, 7), 0.0, 0.0)
    assert pos.elevation_deg > 89.0


def test_timezone_aware_input_is_converted():
    naive = solar.solar_position(datetime(2023, 6, 21, 10, 0), *TALLINN)
    aware = solar.solar_position(
        datetime(2023, 6, 21, 13, 0, tzinfo=timezone(timedelta(hours=3))), *TALLINN
    )
    assert aware == naive


def test_vectorised_equals_scalar():
    times = np.datetime64("2023-06-21T00") + np.arange(24).astype("timedelta64[h]")
    elev, az = solar.solar_position_array(times, *TALLINN)
    for k in (0, 6, 10, 18):
        pos = solar.solar_position(times[k].astype(datetime), *TALLINN)
        assert elev[k] == pytest.approx(pos.elevation_deg, abs=1e-12)
        assert az[k] == pytest.approx(pos.azimuth_deg, abs=1e-12)


@pytest.mark.parametrize("lat,lon", [(91, 0), (-91, 0), (0, 181), (np.nan, 0)])
def test_rejects_bad_coordinates(lat, lon):
    with pytest.raises(InvalidInputError):
        solar.solar_position(datetime(2023, 1, 1), lat, lon)


def test_rejects_out_of_range_year():
    with pytest.raises(InvalidInputError):
        solar.solar_position(datetime(1900, 1, 1), 0, 0)


def test_clear_sky_values():
    assert solar.clear_sky_ghi(90.0) == pytest.approx(952.77, abs=0.01)
    for h in (0.5, 5, 10, 30, 60, 89):
        assert solar.clear_sky_ghi(h) == pytest.approx(clear_sky_oracle(h), rel=1e-12)


@pytest.mark.parametrize("h", [0.0, -0.001, -10.0, -90.0])
def test_sun_down_means_no_irradiance(h):
    assert solar.clear_sky_ghi(h) == 0.0


def test_air_mass():
    assert solar.air_mass(90.0) == pytest.approx(1.0, abs=1e-3)
    assert np.isinf(solar.air_mass(-1.0))


def test_clear_sky_irradiance_dataclass():
    irr = solar.clear_sky_irradiance(solar.SolarPosition(30.0, 180.0))
    assert irr.i_t == pytest.approx(385.0144687, abs=1e-6)


def test_tallinn_solstices():
    summer = solar.irradiance_series(
        np.datetime64("2023-06-21T00") + np.arange(24).astype("timedelta64[h]"), *TALLINN)
    winter = solar.irradiance_series(
        np.datetime64("2023-12-21T00") + np.arange(24).astype("timedelta64[h]"), *TALLINN)
    assert 700 <= summer.max() <= 1050
    assert winter.max() < 200
    assert winter[[0, 1, 2, 3, 4, 5, 16, 17, 18, 19, 20, 21, 22, 23]].max() == 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(-90, 90), st.floats(-90, 90))
def test_irradiance_monotone_and_bounded(a, b):
    lo, hi = sorted((a, b))
    assert 0.0 <= solar.clear_sky_ghi(lo) <= solar.clear_sky_ghi(hi) <= solar.SOLAR_CONSTANT


@settings(max_examples=200, deadline=None)
@given(
    st.datetimes(min_value=datetime(1951, 1, 1), max_value=datetime(2099, 12, 31)),
    st.floats(-90, 90),
    st.floats(-180, 180),
)
def test_position_ranges(t, lat, lon):
    pos = solar.solar_position(t, lat, lon)
    assert -90.0 <= pos.elevation_deg <= 90.0
    assert 0.0 <= pos.azimuth_deg < 360.0
