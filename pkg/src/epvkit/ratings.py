"""Actual-vs-expected (AE) player ratings from the league EPV surface.

Every action is credited with its possession's terminal points and debited
the expected points at its location; a player's credits are summed over
the season and scaled by their team's median possessions per fixture:

    ae = sum_actions (Points(outcome) - EPV(x, y)) / median_possessions

Players appearing for several teams get one rating per (player, team)
pair, since the denominator is team-specific. Ratings sort descending,
with ties broken by higher actual points, then player id.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from pathlib import Path

from .errors import DataFormatError
from .ingest import Action
from .mixture.gibbs import Posterior
from .surfaces import epv_at


@dataclass(frozen=True)
class PlayerRating:
    player_id: str
    team: str
    ae_rating: float
    actions_count: int
    actual_sum: float
    expected_sum: float
    median_possessions: float


def team_median_possessions(actions: list[Action], team: str) -> float:
    """Median over the team's fixtures of its distinct possession count."""
    per_fixture: dict[str, set[int]] = {}
    for a in actions:
        if a.attacking_team == team:
            per_fixture.setdefault(a.fixture_id, set()).add(a.possession_num)
    if not per_fixture:
        raise DataFormatError(f"team {team!r} has no attacking possessions in the data")
    return float(statistics.median(sorted(len(v) for v in per_fixture.values())))


def rate_players(actions: list[Action], league_posterior: Posterior) -> list[PlayerRating]:
    """AE rating for every (player, team) pair with at least one action."""
    mean = league_posterior.mean
    actual: dict[tuple[str, str], float] = {}
    expected: dict[tuple[str, str], float] = {}
    count: dict[tuple[str, str], int] = {}
    for a in actions:
        key = (a.player_id, a.attacking_team)
        actual[key] = actual.get(key, 0.0) + float(a.outcome.points)
        expected[key] = expected.get(key, 0.0) + epv_at(mean, a.x, a.y)
        count[key] = count.get(key, 0) + 1

    medians = {
        team: team_median_possessions(actions, team)
        for team in {a.attacking_team for a in actions}
    }
    ratings = [
        PlayerRating(
            player_id=player,
            team=team,
            ae_rating=(actual[key] - expected[key]) / medians[team],
            actions_count=count[key],
            actual_sum=actual[key],
            expected_sum=expected[key],
            median_possessions=medians[team],
        )
        for key in sorted(actual)
        for player, team in [key]
    ]
    ratings.sort(key=lambda r: (-r.ae_rating, -r.actual_sum, r.player_id))
    return ratings


def summary_table(ratings: list[PlayerRating], k: int) -> list[PlayerRating]:
    """Top-k rows; fewer when fewer players exist."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return ratings[:k]


RATINGS_HEADER = (
    "player_id",
    "team",
    "ae_rating",
    "actions",
    "actual_sum",
    "expected_sum",
    "median_possessions",
)


def save_ratings_csv(ratings: list[PlayerRating], path: str | Path) -> None:
    """Write ratings with 4 decimal places on the rating columns."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RATINGS_HEADER)
        for r in ratings:
            writer.writerow(
                [
                    r.player_id,
                    r.team,
                    f"{r.ae_rating:.4f}",
                    r.actions_count,
                    f"{r.actual_sum:.4f}",
                    f"{r.expected_sum:.4f}",
                    f"{r.median_possessions:.4f}",
                ]
            )
