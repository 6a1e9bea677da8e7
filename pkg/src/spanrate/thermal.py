"""Steady-state conductor heat balance.

Heating (Joule + solar) is balanced against cooling (convection + radiation)
per metre of conductor.  Magnetic, corona and evaporative terms are not
modelled; magnetic heating is assumed to be inside the catalog AC resistance.

Every function accepts scalars or numpy arrays and broadcasts; scalar inputs
give Python floats back.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleRatingError, InvalidInputError, OutOfModelRangeError

STEFAN_BOLTZMANN = 5.670374419e-8  # W/(m^2 K^4)
GRAVITY = 9.807  # m/s^2
KELVIN = 273.15

# stranded conductor forced convection, Nu = B * Re**n
FORCED_LOW = (0.641, 0.471)
FORCED_HIGH = (0.048, 0.800)
# natural convection, Nu = A * (Gr*Pr)**m
NATURAL_LOW = (0.850, 0.188)
NATURAL_HIGH = (0.480, 0.250)

SOLVER_T_MAX_C = 300.0
SOLVER_MAX_ITER = 64
SOLVER_TOL_C = 1e-3
RESIDUAL_RTOL = 1e-6


def _ret(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class Conductor:
    """Catalog data for one conductor type.

    Resistances are AC values per metre at the two reference temperatures;
    anything in between (or beyond) is linearly interpolated.
    """

    name: str
    diameter_m: float
    r_ref_ohm_per_m: float
    r_ref_high_ohm_per_m: float
    t_ref_low_c: float = 20.0
    t_ref_high_c: float = 80.0
    absorptivity: float = 0.7
    emissivity: float = 0.7

    def __post_init__(self):
        if not self.diameter_m > 0:
            raise InvalidInputError(f"{self.name}: diameter must be positive")
        if not 0 < self.r_ref_ohm_per_m <= self.r_ref_high_ohm_per_m:
            raise InvalidInputError(f"{self.name}: need 0 < r_low <= r_high")
        if not self.t_ref_low_c < self.t_ref_high_c:
            raise InvalidInputError(f"{self.name}: need t_low < t_high")
        for field in ("absorptivity", "emissivity"):
            v = getattr(self, field)
            if not 0 < v <= 1:
                raise InvalidInputError(f"{self.name}: {field} must lie in (0, 1]")


def fold_attack_angle(angle_deg):
    """Fold any angle between wind and span axis into ``[0, 90]`` degrees."""
    a = np.mod(np.asarray(angle_deg, dtype=float), 180.0)
    return _ret(np.minimum(a, 180.0 - a))


@dataclass(frozen=True)
class AmbientConditions:
    """Weather seen by one span.  Fields may be numpy arrays of equal shape."""

    wind_speed_ms: float
    attack_angle_deg: float
    ambient_temp_c: float
    irradiance_wm2: float = 0.0
    elevation_m: float = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.wind_speed_ms) < 0):
            raise InvalidInputError("wind speed must be >= 0")
        if np.any(np.asarray(self.irradiance_wm2) < 0):
            raise InvalidInputError("irradiance must be >= 0")
        object.__setattr__(self, "attack_angle_deg", fold_attack_angle(self.attack_angle_deg))


@dataclass(frozen=True)
class HeatBalanceTerms:
    p_j: float
    p_s: float
    p_c: float
    p_r: float

    @property
    def residual(self):
        return self.p_j + self.p_s - self.p_c - self.p_r


def resistance_at(conductor, t_c):
    """AC resistance (ohm/m) at conductor temperature ``t_c``, linear in temperature."""
    slope = (conductor.r_ref_high_ohm_per_m - conductor.r_ref_ohm_per_m) / (
        conductor.t_ref_high_c - conductor.t_ref_low_c
    )
    t = np.asarray(t_c, dtype=float)
    return _ret(conductor.r_ref_ohm_per_m + slope * (t - conductor.t_ref_low_c))


def joule_heating(current_a, conductor, t_s_c):
    i = np.asarray(current_a, dtype=float)
    if np.any(i < 0):
        raise InvalidInputError("current must be >= 0")
    return _ret(i * i * resistance_at(conductor, t_s_c))


def solar_heating(conductor, irradiance_wm2):
    """Solar gain per metre: absorptivity x global irradiance x diameter."""
    g = np.asarray(irradiance_wm2, dtype=float)
    if np.any(g < 0):
        raise InvalidInputError("irradiance must be >= 0")
    return _ret(conductor.absorptivity * g * conductor.diameter_m)


def radiative_cooling(conductor, t_s_c, t_a_c):
    """Stefan-Boltzmann loss to surroundings at ambient temperature, W/m.

    Negative when the conductor is colder than the air.
    """
    ts = np.asarray(t_s_c, dtype=float) + KELVIN
    ta = np.asarray(t_a_c, dtype=float) + KELVIN
    return _ret(
        np.pi * conductor.diameter_m * conductor.emissivity * STEFAN_BOLTZMANN * (ts**4 - ta**4)
    )


def angle_correction(attack_angle_deg):
    """Forced-convection multiplier for wind at ``attack_angle_deg`` to the span axis.

    Equals 1 for perpendicular flow and falls to 0.42 for flow along the
    conductor.  Two sine-power branches meet at 24 degrees.
    """
    d = np.asarray(attack_angle_deg, dtype=float)
    if np.any(~np.isfinite(d)) or np.any(d < 0) or np.any(d > 90):
        raise InvalidInputError("attack angle must lie in [0, 90] degrees")
    s = np.sin(np.radians(d))
    small = 0.42 + 0.68 * s**1.08
    large = 0.42 + 0.58 * s**0.90
    out = np.where(d < 24.0, small, large)
    # sin(pi/2) is exactly 1 so large == 1.0 at 90 deg; keep it explicit anyway
    out = np.where(d == 90.0, 1.0, out)
    return _ret(out)


def air_properties(t_film_c, elevation_m=0.0):
    """Thermal conductivity, kinematic viscosity and relative density of air.

    Returns ``(lambda_f [W/(m K)], nu_f [m^2/s], rho_rel [-])``.
    """
    tf = np.asarray(t_film_c, dtype=float)
    lam = 2.368e-2 + 7.23e-5 * tf
    nu = 1.32e-5 + 9.5e-8 * tf
    rho_rel = np.exp(-1.16e-4 * np.asarray(elevation_m, dtype=float))
    return lam, nu, rho_rel


def reynolds_number(diameter_m, wind_speed_ms, t_film_c, elevation_m=0.0):
    _, nu, rho_rel = air_properties(t_film_c, elevation_m)
    return rho_rel * np.asarray(wind_speed_ms, dtype=float) * diameter_m / nu


def _forced_nusselt(re):
    # the two bands are switched where the correlations intersect (Re ~ 2638)
    # so that Nu is continuous and monotone in Re
    lo = FORCED_LOW[0] * re ** FORCED_LOW[1]
    hi = FORCED_HIGH[0] * re ** FORCED_HIGH[1]
    return np.maximum(lo, hi)


def _natural_nusselt(gr_pr):
    # same treatment at Gr*Pr ~ 1.007e4
    lo = NATURAL_LOW[0] * gr_pr ** NATURAL_LOW[1]
    hi = NATURAL_HIGH[0] * gr_pr ** NATURAL_HIGH[1]
    return np.maximum(lo, hi)


def forced_convection(conductor, amb, t_s_c):
    ta = np.asarray(amb.ambient_temp_c, dtype=float)
    ts = np.asarray(t_s_c, dtype=float)
    tf = 0.5 * (ts + ta)
    lam, _, _ = air_properties(tf, amb.elevation_m)
    re = reynolds_number(conductor.diameter_m, amb.wind_speed_ms, tf, amb.elevation_m)
    nu_90 = _forced_nusselt(re)
    return _ret(np.pi * lam * (ts - ta) * nu_90 * angle_correction(amb.attack_angle_deg))


def natural_convection(conductor, amb, t_s_c):
    ta = np.asarray(amb.ambient_temp_c, dtype=float)
    ts = np.asarray(t_s_c, dtype=float)
    tf = 0.5 * (ts + ta)
    lam, nu, _ = air_properties(tf, amb.elevation_m)
    dt = ts - ta
    grashof = conductor.diameter_m**3 * np.abs(dt) * GRAVITY / ((tf + KELVIN) * nu**2)
    prandtl = 0.715 - 2.5e-4 * tf
    return _ret(np.pi * lam * dt * _natural_nusselt(grashof * prandtl))


def convective_cooling(conductor, amb, t_s_c):
    """Convective loss, W/m: the larger of forced and natural convection.

    Taking the maximum is the conservative low-wind treatment, so cooling
    never drops below the still-air value.
    """
    forced = np.asarray(forced_convection(conductor, amb, t_s_c))
    natural = np.asarray(natural_convection(conductor, amb, t_s_c))
    # both terms share the sign of (t_s - t_a); pick the larger magnitude
    return _ret(np.where(np.abs(forced) >= np.abs(natural), forced, natural))


def heat_balance(current_a, conductor, amb, t_s_c):
    """All four heat-balance terms at conductor temperature ``t_s_c``."""
    return HeatBalanceTerms(
        p_j=joule_heating(current_a, conductor, t_s_c),
        p_s=solar_heating(conductor, amb.irradiance_wm2),
        p_c=convective_cooling(conductor, amb, t_s_c),
        p_r=radiative_cooling(conductor, t_s_c, amb.ambient_temp_c),
    )


def solve_ampacity(conductor, amb, t_max_c):
    """Steady-state current that holds the conductor exactly at ``t_max_c``.

    Parameters
    ----------
    conductor : Conductor
    amb : AmbientConditions
        Fields may be arrays; the result then has the broadcast shape.
    t_max_c : float or array_like
        Maximum allowed conductor temperature, degC.

    Returns
    -------
    float or ndarray
        Ampacity in amperes.  Zero where solar gain alone already meets or
        exceeds the available cooling.

    Raises
    ------
    InfeasibleRatingError
        If ``t_max_c`` does not exceed the ambient temperature.
    """
    t_max = np.asarray(t_max_c, dtype=float)
    ta = np.asarray(amb.ambient_temp_c, dtype=float)
    if np.any(t_max <= ta):
        raise InfeasibleRatingError("maximum conductor temperature must exceed ambient")
    net = (
        np.asarray(convective_cooling(conductor, amb, t_max))
        + np.asarray(radiative_cooling(conductor, t_max, ta))
        - np.asarray(solar_heating(conductor, amb.irradiance_wm2))
    )
    r = np.asarray(resistance_at(conductor, t_max))
    return _ret(np.sqrt(np.maximum(net, 0.0) / r))


def _net_heat(current, conductor, amb, t_s):
    return (
        np.asarray(joule_heating(current, conductor, t_s))
        + np.asarray(solar_heating(conductor, amb.irradiance_wm2))
        - np.asarray(convective_cooling(conductor, amb, t_s))
        - np.asarray(radiative_cooling(conductor, t_s, amb.ambient_temp_c))
    )


def solve_conductor_temp(current_a, conductor, amb):
    """Steady-state conductor temperature (degC) for a given current.

    Bisection on ``[ambient, 300 degC]``.  Iteration stops per element once
    the heat-balance residual is below ``1e-6 * max(1, P_j + P_s)`` and the
    bracket is narrower than 1e-3 degC, or after 64 halvings.

    Raises
    ------
    OutOfModelRangeError
        If heating still exceeds cooling at 300 degC.
    """
    i = np.asarray(current_a, dtype=float)
    if np.any(i < 0):
        raise InvalidInputError("current must be >= 0")
    ta = np.asarray(amb.ambient_temp_c, dtype=float)
    shape = np.broadcast_shapes(i.shape, ta.shape, np.shape(amb.wind_speed_ms),
                                np.shape(amb.irradiance_wm2), np.shape(amb.attack_angle_deg))
    lo = np.broadcast_to(ta, shape).astype(float)
    hi = np.full(shape, SOLVER_T_MAX_C)
    if np.any(lo >= hi):
        raise OutOfModelRangeError("ambient temperature above solver range")

    if np.any(_net_heat(i, conductor, amb, hi) > 0):
        raise OutOfModelRangeError(f"conductor would exceed {SOLVER_T_MAX_C} degC")

    f_lo = np.broadcast_to(_net_heat(i, conductor, amb, lo), shape)
    # no heat input: conductor sits at ambient
    done = f_lo <= 0
    root = np.where(done, lo, 0.5 * (lo + hi))
    for _ in range(SOLVER_MAX_ITER):
        if np.all(done):
            break
        mid = 0.5 * (lo + hi)
        f_mid = np.broadcast_to(_net_heat(i, conductor, amb, mid), shape)
        p_heat = np.broadcast_to(
            np.asarray(joule_heating(i, conductor, mid))
            + np.asarray(solar_heating(conductor, amb.irradiance_wm2)),
            shape,
        )
        converged = (np.abs(f_mid) < RESIDUAL_RTOL * np.maximum(1.0, p_heat)) & (
            hi - lo < SOLVER_TOL_C
        )
        root = np.where(done, root, mid)
        done = done | converged
        lo = np.where(~done & (f_mid > 0), mid, lo)
        hi = np.where(~done & (f_mid <= 0), mid, hi)
    return _ret(root)
