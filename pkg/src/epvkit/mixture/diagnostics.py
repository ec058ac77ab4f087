"""Convergence diagnostics: split R-hat and autocorrelation-based ESS.

Both operate on a (chains, draws) array for a single scalar quantity.
Chains are split in half, so R-hat also flags within-chain drift. ESS uses
FFT autocovariances combined across split chains with Geyer's initial
positive / initial monotone sequence truncation.
"""

from __future__ import annotations

import numpy as np


def _split(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a (chains, draws) array")
    half = x.shape[1] // 2
    return np.concatenate([x[:, :half], x[:, x.shape[1] - half :]], axis=0)


def split_rhat(x: np.ndarray) -> float:
    """Potential scale reduction over half-chains; 1.0 when degenerate."""
    seq = _split(x)
    m, n = seq.shape
    if n < 2:
        return float("nan")
    within = seq.var(axis=1, ddof=1).mean()
    if within == 0.0:
        # all draws identical (a centre pinned by a degenerate prior):
        # report perfect mixing rather than 0/0
        return 1.0
    between = n * seq.mean(axis=1).var(ddof=1)
    var_hat = (n - 1) / n * within + between / n
    return float(np.sqrt(var_hat / within))


def _autocov(seq: np.ndarray) -> np.ndarray:
    """Per-row autocovariance (biased, lag 0..n-1) via FFT."""
    m, n = seq.shape
    centred = seq - seq.mean(axis=1, keepdims=True)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(centred, size, axis=1)
    acov = np.fft.irfft(f * np.conj(f), size, axis=1)[:, :n]
    return acov / n


def ess(x: np.ndarray) -> float:
    """Effective sample size of the pooled draws, capped at their count."""
    seq = _split(x)
    m, n = seq.shape
    total = x.size
    if n < 4:
        return float(total)
    acov = _autocov(seq)
    within = acov[:, 0].mean() * n / (n - 1)
    if within == 0.0:
        return float(total)
    var_plus = within * (n - 1) / n
    if m > 1:
        var_plus += seq.mean(axis=1).var(ddof=1)
    mean_acov = acov.mean(axis=0)

    # Geyer initial positive sequence: keep consecutive lag pairs
    # (rho_0+rho_1), (rho_2+rho_3), ... while their sums stay positive
    rho = 1.0 - (within - mean_acov) / var_plus
    rho[0] = 1.0
    pair_sums: list[float] = []
    t = 0
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair <= 0.0:
            break
        pair_sums.append(float(pair))
        t += 2
    # initial monotone sequence: enforce non-increasing pair sums
    for i in range(1, len(pair_sums)):
        pair_sums[i] = min(pair_sums[i], pair_sums[i - 1])
    tau = -1.0 + 2.0 * sum(pair_sums)
    tau = max(tau, 1.0 / np.log10(max(total, 10)))
    return float(min(total, total / tau))
