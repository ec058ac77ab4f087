"""Dirichlet maximum likelihood via Minka's digamma fixed point.

Used to turn pooled league-posterior samples into per-centre Dirichlet
priors for the team fits: each centre's alpha solves

    digamma(alpha_s) - digamma(sum(alpha)) = mean log pi_s

which is iterated as alpha_s <- digamma_inverse(digamma(sum alpha) +
mean log pi_s) from a moment-matched start.
"""

from __future__ import annotations

import numpy as np
from scipy.special import digamma, polygamma

from ..errors import MleConvergenceError
from ..outcomes import N_OUTCOMES
from ..pitch import N_CENTRES
from .gibbs import Posterior

EPS = 1e-10
MIN_SAMPLES = 100
TOL = 1e-8
MAX_ITER = 10_000


def digamma_inverse(y: np.ndarray) -> np.ndarray:
    """Solve digamma(x) = y by five Newton steps from Minka's starting point."""
    y = np.asarray(y, dtype=float)
    # a diverging caller can push y to extremes; overflow here surfaces as
    # non-finite alpha and is rejected by the fit loop
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        x = np.where(y >= -2.22, np.exp(y) + 0.5, -1.0 / (y - digamma(1.0)))
        for _ in range(5):
            x = x - (digamma(x) - y) / polygamma(1, x)
    return x


def fit_dirichlet_mle(samples: np.ndarray) -> np.ndarray:
    """Maximum-likelihood Dirichlet parameters for simplex samples (n, 5)."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != N_OUTCOMES:
        raise MleConvergenceError(f"expected (n, {N_OUTCOMES}) samples, got {samples.shape}")
    n = samples.shape[0]
    if n < MIN_SAMPLES:
        raise MleConvergenceError(f"need at least {MIN_SAMPLES} samples, got {n}")
    clamped = np.clip(samples, EPS, 1.0 - EPS)
    # the range is exact where a variance of identical floats is not
    if np.all(clamped.max(axis=0) == clamped.min(axis=0)):
        raise MleConvergenceError("degenerate input: all samples identical (zero variance)")
    var = clamped.var(axis=0)

    mean = clamped.mean(axis=0)
    mean_log = np.log(clamped).mean(axis=0)

    # moment-matched concentration start; the median over components keeps
    # one near-constant component from exploding the initial guess
    with np.errstate(divide="ignore", invalid="ignore"):
        per_comp = mean * (1.0 - mean) / var - 1.0
    per_comp = per_comp[np.isfinite(per_comp) & (per_comp > 0)]
    s0 = float(np.median(per_comp)) if per_comp.size else 1.0
    alpha = np.maximum(mean * s0, 1e-3)

    for it in range(MAX_ITER):
        new = digamma_inverse(digamma(alpha.sum()) + mean_log)
        delta = float(np.max(np.abs(new - alpha)))
        alpha = new
        if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
            raise MleConvergenceError(
                f"fixed point left the positive orthant at iteration {it + 1}"
            )
        if delta < TOL:
            return alpha
    raise MleConvergenceError(
        f"no convergence after {MAX_ITER} iterations (last max step {delta:.3e})"
    )


def derive_team_prior(league_posterior: Posterior) -> np.ndarray:
    """Per-centre MLE fit over the pooled league posterior samples (33, 5)."""
    pooled = league_posterior.pooled
    alpha = np.empty((N_CENTRES, N_OUTCOMES))
    for k in range(N_CENTRES):
        try:
            alpha[k] = fit_dirichlet_mle(pooled[:, k, :])
        except MleConvergenceError as err:
            raise MleConvergenceError(f"centre {k}: {err}") from err
    return alpha
