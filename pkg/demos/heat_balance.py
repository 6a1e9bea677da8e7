"""
Ampacity of one span under changing weather
===========================================

Solve the steady-state heat balance for a 242 mm2 ACSR conductor and see how
wind speed, attack angle and sunshine move its ampacity.
"""

import numpy as np

from spanrate import thermal
from spanrate.model_io import load_conductor_catalog

conductor = load_conductor_catalog()["ACSR242"]

##############################################################################
# Static assumptions: 0.61 m/s perpendicular wind, 25 C, full sun.

still = thermal.AmbientConditions(0.61, 90.0, 25.0, irradiance_wm2=1033.0)
i_static = thermal.solve_ampacity(conductor, still, 80.0)
terms = thermal.heat_balance(i_static, conductor, still, 80.0)
print(f"static rating at 80 C: {i_static:.0f} A")
print(f"  joule {terms.p_j:.1f}  solar {terms.p_s:.1f}  convection {terms.p_c:.1f}  radiation {terms.p_r:.1f} W/m")

##############################################################################
# Wind speed and direction.  Parallel wind still cools, but far less.

winds = np.array([0.0, 0.61, 1.0, 2.0, 4.0, 8.0])
for angle in (0.0, 25.0, 45.0, 90.0):
    amb = thermal.AmbientConditions(winds, np.full_like(winds, angle), np.full_like(winds, 25.0), 1033.0)
    amps = thermal.solve_ampacity(conductor, amb, 80.0)
    print(f"angle {angle:4.0f} deg: " + "  ".join(f"{a:6.0f}" for a in amps))

##############################################################################
# Going the other way: what temperature does the conductor reach at a
# given load on a calm winter night?

night = thermal.AmbientConditions(0.61, 25.0, -10.0)
for load in (300.0, 600.0, 900.0):
    t = thermal.solve_conductor_temp(load, conductor, night)
    print(f"{load:5.0f} A -> {t:5.1f} C")
