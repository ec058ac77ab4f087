"""Data-augmentation Gibbs sampler for the fixed-weight mixture posterior.

The sampler alternates two exact conditionals: each observation's latent
centre assignment is categorical over its support
(``c_i`` proportional to ``z_k(x_i, y_i) * P_k(s_i)``), and each centre's
simplex is the conjugate Dirichlet update of its prior by the assigned
outcome counts.

All randomness is drawn here at the driver level from per-chain Philox
streams spawned off one seed; the assignment sweep itself is a pure
function of (data, current simplices, uniforms). Two interchangeable
sweep implementations exist, a compiled extension and a numpy fallback,
written to the same floating-point operation order so a fit is
bit-identical whichever one runs. When any simplex entry underflows below
1e-300 the iteration's sweep switches to a shared max-subtraction
log-space path.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ArtifactError, ConfigError
from ..outcomes import N_OUTCOMES, OUTCOME_NAMES
from ..pitch import CENTRES, N_CENTRES
from . import _sweep_np
from .data import PreparedDataset
from .diagnostics import ess as _ess_fn
from .diagnostics import split_rhat
from .priors import validate_alpha

try:
    from . import _sweep as _compiled
except ImportError:  # extension not built; numpy path only
    _compiled = None

_TINY = 1e-300
_MAGIC = b"EPVSMP01"


def available_backends() -> tuple[str, ...]:
    return ("compiled", "numpy") if _compiled is not None else ("numpy",)


def _resolve_backend(name: str | None):
    if name is None:
        name = available_backends()[0]
    if name == "numpy":
        return _sweep_np.sweep
    if name == "compiled":
        if _compiled is None:
            raise ConfigError("compiled sweep extension is not available")
        return _compiled.sweep
    raise ConfigError(f"unknown sweep backend {name!r}")


@dataclass(frozen=True)
class SamplerConfig:
    """Gibbs run configuration; the seed has no default on purpose."""

    seed: int
    chains: int = 4
    iterations: int = 5000
    burn_in: int = 1000
    thinning: int = 4
    rhat_threshold: float = 1.01

    def validate(self) -> None:
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.chains < 2:
            raise ConfigError("at least 2 chains are required for diagnostics")
        if self.burn_in < 0 or self.iterations <= self.burn_in:
            raise ConfigError("need iterations > burn_in >= 0")
        if self.thinning < 1:
            raise ConfigError("thinning must be >= 1")
        if (self.iterations - self.burn_in) % self.thinning:
            raise ConfigError("thinning must divide iterations - burn_in")

    @property
    def kept_per_chain(self) -> int:
        return (self.iterations - self.burn_in) // self.thinning


@dataclass(frozen=True)
class Posterior:
    """Pooled posterior draws and their summaries.

    ``samples`` has shape (chains, kept_per_chain, 33, 5); summaries are
    (33, 5). ``warnings`` is non-empty whenever any R-hat exceeded the
    configured threshold.
    """

    samples: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    rhat: np.ndarray
    ess: np.ndarray
    config: SamplerConfig
    warnings: tuple[str, ...]

    @property
    def pooled(self) -> np.ndarray:
        return self.samples.reshape(-1, N_CENTRES, N_OUTCOMES)

    def standard_error(self) -> np.ndarray:
        """Monte-Carlo standard error of each posterior mean."""
        return self.std / np.sqrt(self.ess)


def _sweep_logspace(support_idx, support_w, outcomes, prob, u):
    """Assignment sweep in log space; used by every backend when any
    simplex entry is below the underflow guard."""
    with np.errstate(divide="ignore"):
        logp = np.log(support_w) + np.log(prob[support_idx, outcomes[:, None]])
    m = logp.max(axis=1)
    p = np.zeros_like(support_w)
    finite = np.isfinite(m)
    if np.any(finite):
        p[finite] = np.exp(logp[finite] - m[finite, None])
    if not np.all(finite):
        # no support centre gives this outcome positive density; fall back
        # to the location weights alone
        p[~finite] = support_w[~finite]
    cum = np.cumsum(p, axis=1)
    thr = u * cum[:, -1]
    pick = (cum < thr[:, None]).sum(axis=1)
    chosen = support_idx[np.arange(p.shape[0]), pick]
    flat = chosen.astype(np.int64) * N_OUTCOMES + outcomes
    return np.bincount(flat, minlength=N_CENTRES * N_OUTCOMES).reshape(
        N_CENTRES, N_OUTCOMES
    )


def _draw_simplices(rng: np.random.Generator, concentration: np.ndarray) -> np.ndarray:
    gam = rng.standard_gamma(concentration)
    return gam / gam.sum(axis=1, keepdims=True)


def _run_chain(data, alpha, config, seedseq, sweep_fn) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seedseq))
    kept = np.empty((config.kept_per_chain, N_CENTRES, N_OUTCOMES))
    prob = _draw_simplices(rng, alpha)
    j = 0
    for it in range(config.iterations):
        if data.n:
            u = rng.random(data.n)
            if prob.min() < _TINY:
                counts = _sweep_logspace(
                    data.support_idx, data.support_w, data.outcomes, prob, u
                )
            else:
                counts = sweep_fn(
                    data.support_idx, data.support_w, data.outcomes, prob, u
                )
            prob = _draw_simplices(rng, alpha + counts)
        else:
            prob = _draw_simplices(rng, alpha)
        if it >= config.burn_in and (it - config.burn_in) % config.thinning == 0:
            kept[j] = prob
            j += 1
    return kept


def _summarize(samples: np.ndarray, config: SamplerConfig) -> Posterior:
    pooled = samples.reshape(-1, N_CENTRES, N_OUTCOMES)
    mean = pooled.mean(axis=0)
    std = pooled.std(axis=0, ddof=1)
    rhat = np.empty((N_CENTRES, N_OUTCOMES))
    ess = np.empty((N_CENTRES, N_OUTCOMES))
    for k in range(N_CENTRES):
        for s in range(N_OUTCOMES):
            series = samples[:, :, k, s]
            rhat[k, s] = split_rhat(series)
            ess[k, s] = _ess_fn(series)
    warnings: list[str] = []
    over = rhat > config.rhat_threshold
    if np.any(over):
        k, s = np.unravel_index(np.argmax(rhat), rhat.shape)
        warnings.append(
            f"{int(over.sum())} centre-outcome series have R-hat above "
            f"{config.rhat_threshold} (max {rhat[k, s]:.4f} at centre {k}, "
            f"{OUTCOME_NAMES[s]}); treat this fit as unconverged"
        )
    return Posterior(
        samples=samples,
        mean=mean,
        std=std,
        rhat=rhat,
        ess=ess,
        config=config,
        warnings=tuple(warnings),
    )


def gibbs_fit(
    data: PreparedDataset,
    alpha: np.ndarray,
    config: SamplerConfig,
    backend: str | None = None,
) -> Posterior:
    """Sample the mixture posterior; deterministic given seed and config."""
    config.validate()
    alpha = validate_alpha(alpha)
    sweep_fn = _resolve_backend(backend)
    streams = np.random.SeedSequence(config.seed).spawn(config.chains)
    samples = np.empty((config.chains, config.kept_per_chain, N_CENTRES, N_OUTCOMES))
    for c, seedseq in enumerate(streams):
        samples[c] = _run_chain(data, alpha, config, seedseq, sweep_fn)
    return _summarize(samples, config)


# ---------------------------------------------------------------------------
# persistence: a posterior is a directory {summary.csv, samples.bin,
# config.json}; samples.bin is the source of truth and the summary is
# recomputed and cross-checked on load

SUMMARY_HEADER = ["centre", "x", "y", "outcome", "mean", "std", "rhat", "ess"]


def save_posterior(post: Posterior, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    with open(directory / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for c in CENTRES:
            y = "TRY" if c.y is None else repr(c.y)
            for s, name in enumerate(OUTCOME_NAMES):
                writer.writerow(
                    [
                        c.index,
                        repr(c.x),
                        y,
                        name,
                        repr(float(post.mean[c.index, s])),
                        repr(float(post.std[c.index, s])),
                        repr(float(post.rhat[c.index, s])),
                        repr(float(post.ess[c.index, s])),
                    ]
                )

    chains, kept = post.samples.shape[:2]
    with open(directory / "samples.bin", "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<4I", chains, kept, N_CENTRES, N_OUTCOMES))
        fh.write(np.ascontiguousarray(post.samples, dtype="<f8").tobytes())

    payload = dataclasses.asdict(post.config)
    payload["warnings"] = list(post.warnings)
    with open(directory / "config.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_posterior(directory: str | Path) -> Posterior:
    """Rebuild a posterior from disk, verifying shape and summary agreement."""
    directory = Path(directory)
    try:
        payload = json.loads((directory / "config.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ArtifactError(f"{directory} is not a posterior directory") from None
    saved_warnings = tuple(payload.pop("warnings", []))
    try:
        config = SamplerConfig(**payload)
    except TypeError:
        raise ArtifactError(f"{directory}/config.json has unexpected fields") from None

    raw = (directory / "samples.bin").read_bytes()
    if raw[: len(_MAGIC)] != _MAGIC:
        raise ArtifactError(f"{directory}/samples.bin has a wrong magic header")
    chains, kept, n_centres, n_outcomes = struct.unpack_from("<4I", raw, len(_MAGIC))
    if (n_centres, n_outcomes) != (N_CENTRES, N_OUTCOMES):
        raise ArtifactError(
            f"samples.bin holds a {n_centres}x{n_outcomes} model, expected "
            f"{N_CENTRES}x{N_OUTCOMES}"
        )
    if chains != config.chains or kept != config.kept_per_chain:
        raise ArtifactError("samples.bin shape disagrees with config.json")
    body = raw[len(_MAGIC) + struct.calcsize("<4I") :]
    expected = chains * kept * n_centres * n_outcomes * 8
    if len(body) != expected:
        raise ArtifactError("samples.bin is truncated")
    samples = np.frombuffer(body, dtype="<f8").reshape(
        chains, kept, n_centres, n_outcomes
    ).astype(float)

    post = _summarize(samples, config)
    post = dataclasses.replace(post, warnings=saved_warnings or post.warnings)

    stored_mean = np.full((N_CENTRES, N_OUTCOMES), np.nan)
    with open(directory / "summary.csv", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != SUMMARY_HEADER:
            raise ArtifactError(f"{directory}/summary.csv has an unexpected header")
        for row in reader:
            stored_mean[int(row[0]), OUTCOME_NAMES.index(row[3])] = float(row[4])
    if not np.allclose(stored_mean, post.mean, rtol=0.0, atol=1e-9):
        raise ArtifactError(
            f"{directory}/summary.csv disagrees with the samples it sits beside"
        )
    return post
