"""Fixed-weight mixture of Dirichlet outcome distributions."""

from .priors import league_prior, load_priors_csv, predictive, save_priors_csv

__all__ = [
    "league_prior",
    "load_priors_csv",
    "predictive",
    "save_priors_csv",
]
