# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Gibbs assignment sweep.

Mirrors ``_sweep_np.sweep`` operation for operation: per observation the
four support terms are accumulated left to right, the threshold is
``u * total`` and the pick is the count of partial sums strictly below it.
Keeping the float semantics identical makes a fit bit-identical whichever
backend runs it.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

from ..outcomes import N_OUTCOMES as _N_OUTCOMES
from ..pitch import N_CENTRES as _N_CENTRES

cdef int N_CENTRES = _N_CENTRES
cdef int N_OUTCOMES = _N_OUTCOMES


def sweep(
    const cnp.int32_t[:, ::1] support_idx,
    const double[:, ::1] support_w,
    const cnp.int8_t[::1] outcomes,
    const double[:, ::1] prob,
    const double[::1] u,
):
    """One assignment sweep; returns per-centre outcome counts (33, 5)."""
    cdef Py_ssize_t n = support_idx.shape[0]
    counts = np.zeros((N_CENTRES, N_OUTCOMES), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] cview = counts
    cdef Py_ssize_t i, j
    cdef int s, pick
    cdef double acc, thr
    cdef double cum[4]

    for i in range(n):
        s = outcomes[i]
        acc = 0.0
        for j in range(4):
            acc = acc + support_w[i, j] * prob[support_idx[i, j], s]
            cum[j] = acc
        thr = u[i] * cum[3]
        pick = 0
        for j in range(4):
            if cum[j] < thr:
                pick += 1
        if pick > 3:
            pick = 3  # unreachable for u in [0, 1); guards the write below
        cview[support_idx[i, pick], s] += 1
    return counts
