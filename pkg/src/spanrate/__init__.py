"""Span-level dynamic line rating for overhead lines.

Clear-sky solar heating, a steady-state conductor heat balance, Monte Carlo
confidence intervals for forecast wind and ambient temperature, and
line-level aggregation of SR, AAR and three DLR variants.
"""

from .exceptions import (
    DegenerateDistributionError,
    InfeasibleRatingError,
    InputValidationError,
    InvalidInputError,
    OutOfModelRangeError,
    SpanrateError,
)
from .geometry import span_bearing
from .ratings import (
    FixedWeather,
    Line,
    RatingVariant,
    RunConfig,
    Span,
    WeatherPrediction,
    compare_variants,
    dynamic_rating,
    hotspot_analysis,
    rate_line,
    static_rating,
    ambient_adjusted_rating,
)
from .thermal import AmbientConditions, Conductor, solve_ampacity, solve_conductor_temp

__version__ = "0.1.0"
