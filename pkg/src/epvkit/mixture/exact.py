"""Exact posterior mean by enumerating latent assignments.

Intended as a test oracle for the Gibbs sampler on small instances: with n
observations whose supports have sizes m_1..m_n, the posterior is a mixture
over the prod(m_i) assignment vectors c, each weighted by

    weight(c)  proportional to  prod_i z_{c_i}  *  prod_k  B(alpha_k + counts_k(c)) / B(alpha_k)

(the second factor is the Dirichlet-multinomial marginal of the counts
landing on each centre), and the posterior mean is the weight-mixed
conjugate mean. Enumeration is refused above a hard bound.
"""

from __future__ import annotations

from itertools import product

import numpy as np
from scipy.special import gammaln

from ..errors import ConfigError
from ..outcomes import N_OUTCOMES
from .data import PreparedDataset
from .priors import validate_alpha

ENUMERATION_BOUND = 10**6


def _log_beta(v: np.ndarray) -> float:
    return float(gammaln(v).sum() - gammaln(v.sum()))


def _supports(data: PreparedDataset) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    size = 1
    for i in range(data.n):
        mask = data.support_w[i] > 0.0
        idx = data.support_idx[i][mask].astype(int)
        logw = np.log(data.support_w[i][mask])
        out.append((idx, logw))
        size *= len(idx)
        if size > ENUMERATION_BOUND:
            raise ConfigError(
                f"assignment space exceeds {ENUMERATION_BOUND}; use gibbs_fit "
                "for instances of this size"
            )
    return out


def exact_posterior_mean(data: PreparedDataset, alpha: np.ndarray) -> np.ndarray:
    """Posterior mean of every centre's simplex, shape (33, 5)."""
    alpha = validate_alpha(alpha)
    result = alpha / alpha.sum(axis=1, keepdims=True)
    if data.n == 0:
        return result

    supports = _supports(data)
    involved = sorted({int(k) for idx, _ in supports for k in idx})
    pos = {k: j for j, k in enumerate(involved)}
    base_log_beta = [_log_beta(alpha[k]) for k in involved]
    outcomes = data.outcomes.astype(int)
    ranges = [range(len(idx)) for idx, _ in supports]

    def assignment_stats(choice):
        counts = np.zeros((len(involved), N_OUTCOMES))
        logw = 0.0
        for i, j in enumerate(choice):
            idx, logwts = supports[i]
            logw += logwts[j]
            counts[pos[idx[j]], outcomes[i]] += 1.0
        for j, k in enumerate(involved):
            if counts[j].any():
                logw += _log_beta(alpha[k] + counts[j]) - base_log_beta[j]
        return logw, counts

    # two passes: the first finds the log-weight maximum for a stable
    # softmax, the second accumulates the weighted conjugate means
    log_weights = [assignment_stats(choice)[0] for choice in product(*ranges)]
    shift = max(log_weights)

    denom = 0.0
    numer = np.zeros((len(involved), N_OUTCOMES))
    for choice, logw in zip(product(*ranges), log_weights):
        _, counts = assignment_stats(choice)
        w = float(np.exp(logw - shift))
        denom += w
        for j, k in enumerate(involved):
            post = alpha[k] + counts[j]
            numer[j] += w * post / post.sum()

    for j, k in enumerate(involved):
        result[k] = numer[j] / denom
    return result
