"""Dirichlet prior tables over the 33 centres.

A prior is a (33, 5) array of positive Dirichlet concentration parameters,
one row per centre in pitch index order, one column per outcome in
``OUTCOME_NAMES`` order. The built-in league prior varies by y band only;
team priors are derived from a league posterior (see ``dirichlet``).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..outcomes import N_OUTCOMES, OUTCOME_NAMES, POINTS
from ..pitch import CENTRES, N_CENTRES

# league-wide concentrations keyed by the y coordinate of the centre band;
# every x position in a band shares the same row
_LEAGUE_BY_BAND = {
    -10.0: (90.0, 1.0, 1.0, 4.0, 4.0),
    20.0: (90.0, 1.0, 1.0, 4.0, 4.0),
    35.0: (85.0, 1.0, 3.0, 5.0, 6.0),
    65.0: (80.0, 1.0, 3.0, 7.0, 9.0),
    90.0: (75.0, 1.0, 3.0, 9.0, 12.0),
    100.0: (70.0, 1.0, 3.0, 10.0, 15.0),
}
_LEAGUE_TRY = (35.0, 1.0, 1.0, 28.0, 35.0)


def league_prior() -> np.ndarray:
    """The built-in league-wide prior, shape (33, 5)."""
    alpha = np.empty((N_CENTRES, N_OUTCOMES))
    for c in CENTRES:
        alpha[c.index] = _LEAGUE_TRY if c.y is None else _LEAGUE_BY_BAND[c.y]
    return alpha


def validate_alpha(alpha: np.ndarray) -> np.ndarray:
    """Check shape and positivity; returns the array as float64."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (N_CENTRES, N_OUTCOMES):
        raise ConfigError(
            f"prior table must have shape ({N_CENTRES}, {N_OUTCOMES}), got {alpha.shape}"
        )
    if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0.0):
        raise ConfigError("prior concentrations must be finite and strictly positive")
    return alpha


def predictive(alpha: np.ndarray) -> np.ndarray:
    """Prior-predictive outcome probabilities, row-normalised alpha."""
    alpha = validate_alpha(alpha)
    return alpha / alpha.sum(axis=1, keepdims=True)


def predictive_epv(alpha: np.ndarray) -> np.ndarray:
    """Prior-predictive expected points at each centre, shape (33,)."""
    return predictive(alpha) @ POINTS


def save_priors_csv(alpha: np.ndarray, path: str | Path) -> None:
    """Write a prior table; floats use repr so loading round-trips exactly."""
    alpha = validate_alpha(alpha)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["centre", "x", "y", *OUTCOME_NAMES])
        for c in CENTRES:
            y = "TRY" if c.y is None else repr(c.y)
            writer.writerow([c.index, repr(c.x), y, *(repr(float(v)) for v in alpha[c.index])])


def load_priors_csv(path: str | Path) -> np.ndarray:
    """Read a prior table written by ``save_priors_csv``."""
    alpha = np.full((N_CENTRES, N_OUTCOMES), np.nan)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["centre", "x", "y", *OUTCOME_NAMES]:
            raise ConfigError(f"unrecognised prior table header in {path}")
        for row in reader:
            if len(row) != 3 + N_OUTCOMES:
                raise ConfigError(f"malformed prior row in {path}: {row!r}")
            idx = int(row[0])
            if not 0 <= idx < N_CENTRES:
                raise ConfigError(f"centre index {idx} out of range in {path}")
            alpha[idx] = [float(v) for v in row[3:]]
    if np.any(np.isnan(alpha)):
        missing = sorted(np.flatnonzero(np.isnan(alpha).any(axis=1)).tolist())
        raise ConfigError(f"prior table {path} is missing centres {missing}")
    return validate_alpha(alpha)
