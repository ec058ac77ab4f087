"""Numpy implementation of the Gibbs assignment sweep.

The compiled extension (``_sweep``) implements the same contract with the
same floating-point operation order, so swapping backends never changes a
sampled chain: per observation, the unnormalised assignment probabilities
are accumulated left to right, the threshold is ``u * total``, and the
chosen support column is the count of partial sums strictly below the
threshold.
"""

from __future__ import annotations

import numpy as np

from ..outcomes import N_OUTCOMES
from ..pitch import N_CENTRES


def sweep(
    support_idx: np.ndarray,
    support_w: np.ndarray,
    outcomes: np.ndarray,
    prob: np.ndarray,
    u: np.ndarray,
) -> np.ndarray:
    """One assignment sweep; returns per-centre outcome counts (33, 5)."""
    p = support_w * prob[support_idx, outcomes[:, None]]
    cum = np.cumsum(p, axis=1)
    thr = u * cum[:, -1]
    pick = (cum < thr[:, None]).sum(axis=1)
    chosen = support_idx[np.arange(p.shape[0]), pick]
    flat = chosen.astype(np.int64) * N_OUTCOMES + outcomes
    return np.bincount(flat, minlength=N_CENTRES * N_OUTCOMES).reshape(
        N_CENTRES, N_OUTCOMES
    )
