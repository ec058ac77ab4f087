"""Possession-outcome probability surfaces and expected possession value.

Event streams from rugby league fixtures are preprocessed into located
actions, a fixed-weight mixture of Dirichlet-distributed outcome
distributions is fitted by Gibbs sampling, and the posterior is turned
into probability / expected-value surfaces and per-player ratings.
"""

from .errors import (
    ArtifactError,
    ConfigError,
    DataFormatError,
    EpvkitError,
    GridMismatchError,
    MleConvergenceError,
    RegionError,
)
from .outcomes import N_OUTCOMES, OUTCOME_NAMES, POINTS, OutcomeLabel

__version__ = "0.1.0"

__all__ = [
    "ArtifactError",
    "ConfigError",
    "DataFormatError",
    "EpvkitError",
    "GridMismatchError",
    "MleConvergenceError",
    "RegionError",
    "N_OUTCOMES",
    "OUTCOME_NAMES",
    "POINTS",
    "OutcomeLabel",
    "__version__",
]
