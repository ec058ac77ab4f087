"""Observation preparation for the mixture model.

Each observation is reduced to its outcome label plus the non-zero
interpolation weights at its location, stored in fixed-width padded arrays
so the sampler's inner sweep can run without Python-level branching:

* ``support_idx``: (n, 4) int32, centre indices, padded with index 0;
* ``support_w``: (n, 4) float64, the matching weights, padded with 0.0;
* ``outcomes``: (n,) int8 outcome codes.

Support columns are ordered by centre index, so the layout (and therefore
everything downstream of it, including sampled randomness) is a pure
function of the data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataFormatError
from ..ingest import Action
from ..outcomes import N_OUTCOMES
from ..pitch import N_CENTRES, weight_matrix
from .priors import predictive

MAX_SUPPORT = 4


@dataclass(frozen=True)
class PreparedDataset:
    """Padded per-observation supports ready for sampling."""

    support_idx: np.ndarray
    support_w: np.ndarray
    outcomes: np.ndarray

    @property
    def n(self) -> int:
        return self.outcomes.shape[0]

    def __post_init__(self) -> None:
        n = self.outcomes.shape[0]
        if self.support_idx.shape != (n, MAX_SUPPORT) or self.support_w.shape != (n, MAX_SUPPORT):
            raise DataFormatError("prepared arrays disagree on observation count")


def prepare_dataset(xs: np.ndarray, ys: np.ndarray, outcomes: np.ndarray) -> PreparedDataset:
    """Build the padded support arrays for located, labelled observations."""
    outcomes = np.asarray(outcomes)
    if outcomes.ndim != 1:
        raise DataFormatError("outcomes must be a 1-D array")
    if outcomes.size and (outcomes.min() < 0 or outcomes.max() >= N_OUTCOMES):
        raise DataFormatError("outcome codes must lie in 0..4")
    w = weight_matrix(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
    if w.shape[0] != outcomes.shape[0]:
        raise DataFormatError("location and outcome counts differ")

    # stable argsort of "is zero" keeps non-zero columns first, in centre
    # index order, and pads with the lowest zero-weight indices
    order = np.argsort(w == 0.0, axis=1, kind="stable")[:, :MAX_SUPPORT]
    support_w = np.take_along_axis(w, order, axis=1)
    support_idx = order.astype(np.int32)
    support_idx[support_w == 0.0] = 0
    return PreparedDataset(
        support_idx=np.ascontiguousarray(support_idx),
        support_w=np.ascontiguousarray(support_w),
        outcomes=np.ascontiguousarray(outcomes, dtype=np.int8),
    )


def prepare_actions(actions: list[Action]) -> PreparedDataset:
    """Prepare processed actions (their locations and outcome labels)."""
    xs = np.array([a.x for a in actions], dtype=float)
    ys = np.array([a.y for a in actions], dtype=float)
    outcomes = np.array([int(a.outcome) for a in actions], dtype=np.int8)
    return prepare_dataset(xs, ys, outcomes)


def log_likelihood(data: PreparedDataset, alpha: np.ndarray) -> float:
    """Marginal log-likelihood under the prior-predictive plug-in.

    Each observation contributes log of the weight-mixed predictive
    probability of its outcome; an empty dataset scores 0.
    """
    if data.n == 0:
        return 0.0
    pred = predictive(alpha)
    per_obs = np.sum(
        data.support_w * pred[data.support_idx, data.outcomes[:, None]], axis=1
    )
    return float(np.sum(np.log(per_obs)))


def expected_assignment_mass(data: PreparedDataset) -> np.ndarray:
    """Total location weight landing on each centre, shape (33,).

    A centre with zero mass is never assigned an observation and keeps
    its prior.
    """
    mass = np.zeros(N_CENTRES)
    if data.n:
        np.add.at(mass, data.support_idx, data.support_w)
    return mass
