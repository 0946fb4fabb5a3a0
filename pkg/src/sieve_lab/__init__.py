"""Simulation and limit-theorem checks for the Bernoulli sieve."""
__version__ = "0.1.0"

from .laws import StepLaw, WLaw, centering, moment_profile, parse_law, parse_step_law, scales
from .walks import GenericSource, SieveSource, WalkPath
from .occupancy import allocate, occupied_count, simulate_trace, theta_delta

__all__ = [
    "GenericSource",
    "SieveSource",
    "StepLaw",
    "WLaw",
    "WalkPath",
    "__version__",
    "allocate",
    "centering",
    "moment_profile",
    "occupied_count",
    "parse_law",
    "parse_step_law",
    "scales",
    "simulate_trace",
    "theta_delta",
]
