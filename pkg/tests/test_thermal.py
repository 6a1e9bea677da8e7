import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanrate import thermal
from spanrate.exceptions import InfeasibleRatingError, InvalidInputError, OutOfModelRangeError
from spanrate.thermal import AmbientConditions, Conductor

from oracles import convection_oracle, heat_terms_oracle

ACSR = Conductor("test", diameter_m=0.0216, r_ref_ohm_per_m=1.0e-4, r_ref_high_ohm_per_m=1.2e-4)


def amb(wind=0.61, angle=90.0, ta=25.0, irr=0.0, elev=0.0):
    return AmbientConditions(wind, angle, ta, irr, elev)


def test_convection_frozen_values():
    # values frozen from the scalar oracle
    a = amb()
    assert thermal.convective_cooling(ACSR, a, 75.0) == pytest.approx(61.49144757853086, rel=1e-12)
    assert thermal.natural_convection(ACSR, a, 75.0) == pytest.approx(27.809257082120993, rel=1e-12)


@pytest.mark.parametrize("wind", [0.0, 0.05, 0.3, 0.61, 2.0, 8.0, 25.0])
@pytest.mark.parametrize("angle", [0.0, 10.0, 24.0, 45.0, 90.0])
@pytest.mark.parametrize("ts,ta", [(50.0, 20.0), (90.0, -20.0), (150.0, 35.0)])
def test_convection_matches_oracle(wind, angle, ts, ta):
    a = amb(wind, angle, ta, elev=300.0)
    pf, pn = convection_oracle(ACSR.diameter_m, ts, ta, wind, angle, 300.0)
    assert thermal.forced_convection(ACSR, a, ts) == pytest.approx(pf, rel=1e-12, abs=1e-12)
    assert thermal.natural_convection(ACSR, a, ts) == pytest.approx(pn, rel=1e-12)
    assert thermal.convective_cooling(ACSR, a, ts) == pytest.approx(max(pf, pn), rel=1e-12)


def test_still_air_is_natural_convection():
    a = amb(wind=0.0)
    assert thermal.convective_cooling(ACSR, a, 80.0) == thermal.natural_convection(ACSR, a, 80.0)


def test_heat_balance_terms_match_oracle():
    a = amb(1.5, 40.0, 10.0, 800.0, 120.0)
    got = thermal.heat_balance(600.0, ACSR, a, 70.0)
    ref = heat_terms_oracle(600.0, ACSR.diameter_m, 1e-4, 1.2e-4, 0.7, 0.7, 70.0, 10.0, 800.0, 1.5, 40.0, 120.0)
    np.testing.assert_allclose([got.p_j, got.p_s, got.p_c, got.p_r], ref, rtol=1e-12)


def test_angle_correction_anchors():
    np.testing.assert_allclose(thermal.angle_correction([0.0, 55.0]), [0.42, 0.90468], atol=1e-5)
    assert thermal.angle_correction(90.0) == 1.0
    grid = thermal.angle_correction(np.arange(0.0, 91.0))
    assert np.all(np.diff(grid) > 0)


@pytest.mark.parametrize("bad", [-1.0, 90.5, np.nan])
def test_angle_correction_domain(bad):
    with pytest.raises(InvalidInputError):
        thermal.angle_correction(bad)


@pytest.mark.parametrize("raw,folded", [(0, 0), (90, 90), (135, 45), (180, 0), (-30, 30), (270, 90), (400, 40)])
def test_fold_attack_angle(raw, folded):
    assert thermal.fold_attack_angle(raw) == pytest.approx(folded)


def test_resistance_interpolates():
    assert thermal.resistance_at(ACSR, 20.0) == pytest.approx(1.0e-4)
    assert thermal.resistance_at(ACSR, 80.0) == pytest.approx(1.2e-4)
    assert thermal.resistance_at(ACSR, 50.0) == pytest.approx(1.1e-4)


def test_ampacity_round_trip():
    a = amb(irr=1033.0)
    i = thermal.solve_ampacity(ACSR, a, 75.0)
    assert i == pytest.approx(736.34, abs=0.01)
    assert thermal.solve_conductor_temp(i, ACSR, a) == pytest.approx(75.0, abs=0.01)
    assert abs(thermal.heat_balance(i, ACSR, a, 75.0).residual) < 1e-9


def test_ampacity_zero_when_sun_outweighs_cooling():
    a = amb(wind=0.0, irr=1300.0, ta=40.0)
    assert thermal.solve_ampacity(ACSR, a, 40.5) == 0.0


def test_infeasible_when_limit_not_above_ambient():
    with pytest.raises(InfeasibleRatingError):
        thermal.solve_ampacity(ACSR, amb(ta=40.0), 40.0)


def test_conductor_temp_out_of_range():
    with pytest.raises(OutOfModelRangeError):
        thermal.solve_conductor_temp(20000.0, ACSR, amb())


def test_zero_current_no_sun_sits_at_ambient():
    assert thermal.solve_conductor_temp(0.0, ACSR, amb(ta=12.0)) == pytest.approx(12.0, abs=1e-3)


def test_vectorised_ampacity_matches_scalar():
    winds = np.array([0.0, 0.61, 3.0, 10.0])
    vec = thermal.solve_ampacity(ACSR, amb(wind=winds, angle=np.full(4, 60.0), ta=np.full(4, 5.0)), 80.0)
    for w, v in zip(winds, vec):
        assert v == pytest.approx(thermal.solve_ampacity(ACSR, amb(w, 60.0, 5.0), 80.0), rel=1e-14)


@pytest.mark.parametrize("kwargs", [
    dict(diameter_m=0.0),
    dict(r_ref_ohm_per_m=2e-4),
    dict(absorptivity=1.5),
    dict(t_ref_high_c=10.0),
])
def test_conductor_validation(kwargs):
    base = dict(name="x", diameter_m=0.02, r_ref_ohm_per_m=1e-4, r_ref_high_ohm_per_m=1.2e-4)
    with pytest.raises(InvalidInputError):
        Conductor(**{**base, **kwargs})


def test_negative_wind_rejected():
    with pytest.raises(InvalidInputError):
        amb(wind=-0.1)


@settings(max_examples=150, deadline=None)
@given(
    st.floats(0.0, 20.0), st.floats(0.0, 20.0),
    st.floats(0.0, 90.0), st.floats(-30.0, 40.0), st.floats(50.0, 150.0),
)
def test_ampacity_monotone_in_wind(w1, w2, angle, ta, t_max):
    lo, hi = sorted((w1, w2))
    i_lo = thermal.solve_ampacity(ACSR, amb(lo, angle, ta), t_max)
    i_hi = thermal.solve_ampacity(ACSR, amb(hi, angle, ta), t_max)
    assert i_lo <= i_hi * (1 + 1e-12)


@settings(max_examples=150, deadline=None)
@given(st.floats(0.0, 20.0), st.floats(0.0, 90.0), st.floats(0.0, 90.0), st.floats(-30.0, 40.0))
def test_ampacity_monotone_in_angle(w, a1, a2, ta):
    lo, hi = sorted((a1, a2))
    assert (thermal.solve_ampacity(ACSR, amb(w, lo, ta), 80.0)
            <= thermal.solve_ampacity(ACSR, amb(w, hi, ta), 80.0) * (1 + 1e-12))


@settings(max_examples=150, deadline=None)
@given(st.floats(0.0, 20.0), st.floats(-30.0, 40.0), st.floats(-30.0, 40.0), st.floats(0.0, 1200.0))
def test_ampacity_decreases_with_ambient_and_sun(w, t1, t2, irr):
    lo, hi = sorted((t1, t2))
    assert (thermal.solve_ampacity(ACSR, amb(w, 90.0, hi, irr), 80.0)
            <= thermal.solve_ampacity(ACSR, amb(w, 90.0, lo, irr), 80.0) * (1 + 1e-12))
    assert (thermal.solve_ampacity(ACSR, amb(w, 90.0, lo, irr), 80.0)
            <= thermal.solve_ampacity(ACSR, amb(w, 90.0, lo, 0.0), 80.0) * (1 + 1e-12))


@settings(max_examples=150, deadline=None)
@given(st.floats(0.0, 0.61), st.floats(0.0, 90.0), st.floats(-30.0, 40.0), st.floats(45.0, 150.0))
def test_low_wind_never_below_natural(w, angle, ta, ts):
    a = amb(w, angle, ta)
    pc = thermal.convective_cooling(ACSR, a, ts)
    assert pc >= thermal.natural_convection(ACSR, amb(0.0, angle, ta), ts) * (1 - 1e-12)
    assert pc == max(thermal.forced_convection(ACSR, a, ts), thermal.natural_convection(ACSR, a, ts))
