"""Support-boundary estimation with nuisance-integrated posteriors.

Irregular location and scale models whose likelihood expands exponentially at
rate ``n`` around the support boundary, plus the machinery to compute marginal
posteriors for the boundary parameter, compare them to their exponential
limits in total variation, and run the desk-scale experiments.
"""

from .nuisance import (
    NuisanceDensity,
    ScoreFunction,
    esscher_scale,
    esscher_shift,
    log_lipschitz_check,
)

__version__ = "0.1.0"

__all__ = [
    "ScoreFunction",
    "NuisanceDensity",
    "esscher_shift",
    "esscher_scale",
    "log_lipschitz_check",
    "__version__",
]
