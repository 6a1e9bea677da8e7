"""
From a wind forecast to rating inputs
=====================================

A forecast gives means and spreads of the eastward (u) and northward (v) wind
components.  Monte Carlo samples of (u, v) become a log-normal speed interval
and a von Mises direction interval, and the direction interval is turned into
the least favourable attack angle for a span.
"""

import numpy as np

from spanrate import stochastic
from spanrate.model_io import load_conductor_catalog
from spanrate.ratings import Span, WeatherPrediction, dynamic_rating

fc = stochastic.WindComponentForecast(u_mean=-2.5, u_std=1.0, v_mean=-1.0, v_std=0.8)
speed_ci, dir_ci = stochastic.wind_intervals(fc, n=1000, seed=7)
az = stochastic.azimuth_interval(dir_ci)
print(f"speed 95% CI: {speed_ci.lower:.2f} .. {speed_ci.upper:.2f} m/s")
print(f"wind from {np.degrees(az.lower):.0f} .. {np.degrees(az.upper):.0f} deg (compass)")

##############################################################################
# A span running north-east.  The CI may include directions nearly along the
# span, which is what the lower-bound rating must assume.

span = Span("A1", (59.40, 24.70), (59.402, 24.704), 30.0, 80.0, load_conductor_catalog()["ACSR242"])
print(f"span bearing {span.bearing_deg:.1f} deg, minimal attack angle "
      f"{stochastic.minimal_attack_angle(az, span.bearing_deg):.1f} deg")

pred = WeatherPrediction("A1", "2023-07-15T13:00:00", fc.u_mean, fc.u_std, fc.v_mean, fc.v_std, 22.0, 1.5)
for variant in ("DLR_LOWER", "DLR_MEAN", "DLR_UPPER"):
    r = dynamic_rating(span, pred, variant, seed=7)
    print(f"{variant:9s} {r.ampacity_a:7.0f} A  wind {r.eff_wind_ms:4.2f} m/s  "
          f"angle {r.eff_angle_deg:5.1f} deg  ambient {r.eff_ambient_c:5.1f} C")
