"""Seed-deterministic synthetic datasets drawn from the model's own law.

Each observation is generated exactly the way the mixture explains data:
draw a location, draw a centre with probability equal to its location
weight, draw the outcome from that centre's ground-truth distribution.
Every observation is its own single-action possession, which keeps the
i.i.d. law valid for recovery tests and rating oracles alike.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .ingest import _RAW_COLUMNS, Action, RawEvent
from .outcomes import N_OUTCOMES, OUTCOME_NAMES, OutcomeLabel
from .pitch import CENTRES, N_CENTRES, X_MAX, X_MIN, Y_MAX, Y_MIN, weight_matrix

LOCATION_LAWS = ("uniform", "central")

# decoy categories are in the vocabulary but never kept by preprocessing
_DECOY_CATEGORIES = ("Tackle", "Play-The-Ball", "Generic Descriptor")

_TERMINAL_BY_OUTCOME = {
    OutcomeLabel.NO_POINTS: ("Move Team", "Carry", True),
    OutcomeLabel.DROP_GOAL: ("Kick Goal", "Field Goal", True),
    OutcomeLabel.PENALTY_GOAL: ("Kick Goal", "Penalty Goal", True),
    OutcomeLabel.UNCONVERTED_TRY: ("Kick Goal", "Conversion", False),
    OutcomeLabel.CONVERTED_TRY: ("Kick Goal", "Conversion", True),
}


def validate_truth(truth: np.ndarray) -> np.ndarray:
    """Check a ground-truth matrix; values pass through so round-trips are exact."""
    truth = np.array(truth, dtype=float)
    if truth.shape != (N_CENTRES, N_OUTCOMES):
        raise ConfigError(
            f"ground truth must have shape {(N_CENTRES, N_OUTCOMES)}, got {truth.shape}"
        )
    if not np.all(np.isfinite(truth)) or np.any(truth < 0.0):
        raise ConfigError("ground-truth entries must be finite and non-negative")
    sums = truth.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        bad = int(np.argmax(np.abs(sums - 1.0)))
        raise ConfigError(f"ground-truth row {bad} sums to {sums[bad]!r}, not 1")
    return truth


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic dataset."""

    truth: np.ndarray
    n_observations: int
    seed: int
    location_law: str = "uniform"
    n_teams: int = 2
    n_fixtures: int = 1
    players_per_team: int = 13

    def __post_init__(self) -> None:
        object.__setattr__(self, "truth", validate_truth(self.truth))
        self.truth.setflags(write=False)
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.n_observations < 0:
            raise ConfigError("n_observations must be >= 0")
        if self.location_law not in LOCATION_LAWS:
            raise ConfigError(f"location_law must be one of {LOCATION_LAWS}")
        if self.n_teams < 2:
            raise ConfigError("need at least two teams")
        if self.n_fixtures < 1 or self.players_per_team < 1:
            raise ConfigError("n_fixtures and players_per_team must be >= 1")

    @property
    def teams(self) -> tuple[str, ...]:
        return tuple(f"team-{k + 1:02d}" for k in range(self.n_teams))

    def fixture_pair(self, f: int) -> tuple[str, str]:
        teams = self.teams
        return teams[(2 * f) % self.n_teams], teams[(2 * f + 1) % self.n_teams]


@dataclass(frozen=True)
class SyntheticDataset:
    """Generated observations plus the latent draws behind them."""

    spec: SyntheticSpec
    actions: tuple[Action, ...]
    xs: np.ndarray
    ys: np.ndarray
    centres: np.ndarray
    outcomes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.actions)


def _draw_locations(rng: np.random.Generator, n: int, law: str) -> tuple[np.ndarray, np.ndarray]:
    if law == "uniform":
        return rng.uniform(X_MIN, X_MAX, n), rng.uniform(Y_MIN, Y_MAX, n)
    # central: normal around midfield, rejected back into the pitch
    xs = np.empty(n)
    ys = np.empty(n)
    pending = np.arange(n)
    while pending.size:
        cx = rng.normal(35.0, 17.5, pending.size)
        cy = rng.normal(50.0, 30.0, pending.size)
        ok = (cx >= X_MIN) & (cx <= X_MAX) & (cy >= Y_MIN) & (cy <= Y_MAX)
        xs[pending[ok]] = cx[ok]
        ys[pending[ok]] = cy[ok]
        pending = pending[~ok]
    return xs, ys


def _categorical_rows(rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Draw one index per row of a non-negative weight matrix."""
    cum = np.cumsum(rows, axis=1)
    thr = u * cum[:, -1]
    return (cum < thr[:, None]).sum(axis=1)


def generate_dataset(spec: SyntheticSpec) -> SyntheticDataset:
    """Draw the dataset described by ``spec``; identical seeds give identical data."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    n = spec.n_observations
    xs, ys = _draw_locations(rng, n, spec.location_law)
    weights = weight_matrix(xs, ys)
    centres = _categorical_rows(weights, rng.random(n))
    outcomes = _categorical_rows(spec.truth[centres], rng.random(n))

    pairs = [spec.fixture_pair(f) for f in range(spec.n_fixtures)]
    actions = []
    for i in range(n):
        f = i % spec.n_fixtures
        turn = i // spec.n_fixtures
        side = turn % 2
        attacking = pairs[f][side]
        defending = pairs[f][1 - side]
        player = f"{attacking}-p{turn % spec.players_per_team + 1:02d}"
        actions.append(
            Action(
                fixture_id=f"fx-{f + 1:03d}",
                attacking_team=attacking,
                defending_team=defending,
                player_id=player,
                x=float(xs[i]),
                y=float(ys[i]),
                possession_num=turn + 1,
                outcome=OutcomeLabel(int(outcomes[i])),
            )
        )
    return SyntheticDataset(
        spec=spec,
        actions=tuple(actions),
        xs=xs,
        ys=ys,
        centres=centres,
        outcomes=outcomes,
    )


def expected_outcome_frequencies(truth: np.ndarray, xs, ys) -> np.ndarray:
    """Outcome law conditional on the drawn locations: mean over rows of z @ truth."""
    truth = validate_truth(truth)
    truth = truth / truth.sum(axis=1)[:, None]
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if xs.size == 0:
        return np.zeros(N_OUTCOMES)
    return (weight_matrix(xs, ys) @ truth).mean(axis=0)


def empirical_outcome_frequencies(outcomes) -> np.ndarray:
    outcomes = np.asarray(outcomes, dtype=np.int64)
    if outcomes.size == 0:
        return np.zeros(N_OUTCOMES)
    return np.bincount(outcomes, minlength=N_OUTCOMES) / outcomes.size


def raw_event_rows(actions, include_decoys: bool = False) -> list[RawEvent]:
    """Encode actions as raw coded events that preprocess back to themselves.

    Each single-action possession becomes one terminal event; with
    ``include_decoys`` a non-kept category event precedes it so the filter
    stage has something to discard.
    """
    rows: list[RawEvent] = []
    for i, a in enumerate(actions):
        if include_decoys:
            rows.append(
                RawEvent(
                    fixture_id=a.fixture_id,
                    attacking_team=a.attacking_team,
                    defending_team=a.defending_team,
                    player_id=f"{a.defending_team}-d01",
                    category=_DECOY_CATEGORIES[i % len(_DECOY_CATEGORIES)],
                    action="Involvement",
                    x=a.x,
                    y=a.y,
                    completed=True,
                    ended_possession=False,
                    sequence_index=len(rows),
                )
            )
        category, act_name, completed = _TERMINAL_BY_OUTCOME[a.outcome]
        rows.append(
            RawEvent(
                fixture_id=a.fixture_id,
                attacking_team=a.attacking_team,
                defending_team=a.defending_team,
                player_id=a.player_id,
                category=category,
                action=act_name,
                x=a.x,
                y=a.y,
                completed=completed,
                ended_possession=True,
                sequence_index=len(rows),
            )
        )
    return rows


def save_events_csv(events, path: str | Path) -> None:
    """Write raw coded events in the layout the preprocessing stage reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_RAW_COLUMNS)
        for e in events:
            writer.writerow(
                [
                    e.fixture_id,
                    e.attacking_team,
                    e.defending_team,
                    e.player_id,
                    e.category,
                    e.action,
                    repr(float(e.x)),
                    repr(float(e.y)),
                    "true" if e.completed else "false",
                    "true" if e.ended_possession else "false",
                ]
            )


def save_truth_csv(truth: np.ndarray, path: str | Path) -> None:
    """Write a ground-truth matrix in the prior-table layout (zeros allowed)."""
    truth = validate_truth(truth)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["centre", "x", "y", *OUTCOME_NAMES])
        for c in CENTRES:
            y = "TRY" if c.y is None else repr(c.y)
            writer.writerow([c.index, repr(c.x), y, *(repr(float(v)) for v in truth[c.index])])


def load_truth_csv(path: str | Path) -> np.ndarray:
    """Read a ground-truth matrix written by ``save_truth_csv``."""
    truth = np.full((N_CENTRES, N_OUTCOMES), np.nan)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["centre", "x", "y", *OUTCOME_NAMES]:
            raise ConfigError(f"unrecognised ground-truth header in {path}")
        for row in reader:
            if len(row) != 3 + N_OUTCOMES:
                raise ConfigError(f"malformed ground-truth row in {path}: {row!r}")
            idx = int(row[0])
            if not 0 <= idx < N_CENTRES:
                raise ConfigError(f"centre index {idx} out of range in {path}")
            truth[idx] = [float(v) for v in row[3:]]
    if np.isnan(truth).any():
        missing = sorted(set(range(N_CENTRES)) - set(np.where(~np.isnan(truth[:, 0]))[0]))
        raise ConfigError(f"ground-truth table {path} missing centres {missing}")
    return validate_truth(truth)
