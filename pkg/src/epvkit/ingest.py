"""Event preprocessing: filter, dedupe, segment into possessions, partition.

The pipeline turns a raw per-event export into located attacking actions:

1. ``filter_categories`` keeps the eight attacking categories and drops
   incomplete events unless they ended the possession.
2. ``dedupe_locations`` removes repeated location codings (second
   consecutive event by the same player within a possession).
3. ``segment_possessions`` numbers possessions per fixture and labels every
   action with the possession's single outcome.
4. ``partition`` organises actions into league / per-team attack / per-team
   defence subsets.

Raw input is UTF-8 CSV with a header; processed actions round-trip through
their own CSV shape (also accepted in the pre-segmented form player, x, y,
PosNum, PosCat).
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataFormatError
from .outcomes import OUTCOME_NAMES, OutcomeLabel
from .pitch import X_MAX, X_MIN, Y_MAX, Y_MIN

# category vocabulary, canonicalised by trim + casefold
CATEGORY_VOCABULARY = frozenset(
    name.casefold()
    for name in (
        "Auxiliary Information",
        "Generic Descriptor",
        "Restart Actions",
        "Move Self",
        "Move Team",
        "Kick Goal",
        "Kick Position",
        "Catch Pass",
        "Catch Kick",
        "Loose Ball",
        "Tackle",
        "Missed Tackle",
        "Run Action",
        "Play-The-Ball",
        "Attacking Descriptor",
        "Defensive Descriptor",
        "Move Self Error",
        "Move Team Error",
        "Catch Error",
        "Penalty Conceded",
        "Defensive Play",
        "Off The Ball",
    )
)

KEPT_CATEGORIES = frozenset(
    (
        "move team",
        "move self",
        "catch kick",
        "kick position",
        "move team error",
        "move self error",
        "loose ball",
        "kick goal",
    )
)

_KICK_GOAL = "kick goal"
_TRY_ACTION = "try"

_TRUE_STRINGS = frozenset(("true", "1", "yes", "t", "y"))
_FALSE_STRINGS = frozenset(("false", "0", "no", "f", "n"))


def _canon(s: str) -> str:
    return s.strip().casefold()


@dataclass(frozen=True)
class RawEvent:
    """One coded event as exported, before any preprocessing."""

    fixture_id: str
    attacking_team: str
    defending_team: str
    player_id: str
    category: str
    action: str
    x: float
    y: float
    completed: bool
    ended_possession: bool
    sequence_index: int
    source_line: int = 0


@dataclass(frozen=True)
class Action:
    """A located attacking action carrying its possession's outcome."""

    fixture_id: str
    attacking_team: str
    defending_team: str
    player_id: str
    x: float
    y: float
    possession_num: int
    outcome: OutcomeLabel


@dataclass(frozen=True)
class DataSubset:
    """A modelling subset: the whole league, or one team's attack/defence."""

    kind: str  # "league" | "attack" | "defence"
    team: str | None
    actions: tuple[Action, ...]

    @property
    def label(self) -> str:
        return self.kind if self.team is None else f"{self.kind}:{self.team}"


@dataclass
class IngestReport:
    """Counters emitted alongside the processed actions."""

    rows_read: int = 0
    rows_kept: int = 0
    dedupe_drops: int = 0
    clamped_locations: int = 0
    possessions: int = 0
    outcome_counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def _parse_bool(raw: str, column: str, line: int) -> bool:
    v = _canon(raw)
    if v in _TRUE_STRINGS:
        return True
    if v in _FALSE_STRINGS:
        return False
    raise DataFormatError(f"line {line}: cannot read {column}={raw!r} as a boolean")


def _parse_float(raw: str, column: str, line: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise DataFormatError(f"line {line}: cannot read {column}={raw!r} as a number") from None


_RAW_COLUMNS = (
    "fixture_id",
    "attacking_team",
    "defending_team",
    "player_id",
    "category",
    "action",
    "x",
    "y",
    "completed",
    "ended_possession",
)


def load_events_csv(path: str | Path) -> tuple[list[RawEvent], int]:
    """Read raw events; returns (events, clamped_location_count).

    Coordinates outside the pitch are clamped to its boundary and counted
    rather than rejected. A ``sequence_index`` column is optional; file
    order is used when absent, and the column must be strictly increasing
    within each fixture when present.
    """
    events: list[RawEvent] = []
    clamped = 0
    last_seq: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in _RAW_COLUMNS if c not in header]
        if missing:
            raise DataFormatError(f"{path}: missing required columns {missing}")
        has_seq = "sequence_index" in header
        for i, row in enumerate(reader):
            line = i + 2  # header is line 1
            x = _parse_float(row["x"], "x", line)
            y = _parse_float(row["y"], "y", line)
            cx = min(max(x, X_MIN), X_MAX)
            cy = min(max(y, Y_MIN), Y_MAX)
            if cx != x or cy != y:
                clamped += 1
            fixture = row["fixture_id"].strip()
            if has_seq:
                seq = int(_parse_float(row["sequence_index"], "sequence_index", line))
                if fixture in last_seq and seq <= last_seq[fixture]:
                    raise DataFormatError(
                        f"line {line}: sequence_index {seq} not increasing in fixture {fixture}"
                    )
                last_seq[fixture] = seq
            else:
                seq = i
            events.append(
                RawEvent(
                    fixture_id=fixture,
                    attacking_team=row["attacking_team"].strip(),
                    defending_team=row["defending_team"].strip(),
                    player_id=row["player_id"].strip(),
                    category=row["category"],
                    action=row["action"],
                    x=cx,
                    y=cy,
                    completed=_parse_bool(row["completed"], "completed", line),
                    ended_possession=_parse_bool(
                        row["ended_possession"], "ended_possession", line
                    ),
                    sequence_index=seq,
                    source_line=line,
                )
            )
    return events, clamped


def filter_categories(events: list[RawEvent]) -> list[RawEvent]:
    """Keep the eight attacking categories, preserving order.

    Incomplete events survive only if they ended the possession. An event
    whose category is not in the known vocabulary is a data error.
    """
    kept = []
    for e in events:
        cat = _canon(e.category)
        if cat not in CATEGORY_VOCABULARY:
            raise DataFormatError(
                f"line {e.source_line}: unknown preprocessing category {e.category!r}"
            )
        if cat not in KEPT_CATEGORIES:
            continue
        if not e.completed and not e.ended_possession:
            continue
        kept.append(e)
    return kept


def _is_kick_goal(e: RawEvent) -> bool:
    return _canon(e.category) == _KICK_GOAL


def _is_completed_try(e: RawEvent) -> bool:
    return e.completed and _canon(e.action) == _TRY_ACTION


def _ends_possession(e: RawEvent) -> bool:
    # a goal-kick attempt always terminates the possession, flagged or not
    return e.ended_possession or _is_kick_goal(e)


def dedupe_locations(events: list[RawEvent]) -> tuple[list[RawEvent], int]:
    """Drop the second of consecutive same-player events in a possession.

    Applied iteratively, so a run of n events by one player keeps only the
    first. When the dropped event carried the possession's outcome (a
    goal-kick attempt or a completed try) or its termination flag, the
    surviving event inherits those attributes so segmentation still sees
    the possession end correctly; only the duplicate location is discarded.
    Returns (surviving events, number dropped).
    """
    out: list[RawEvent] = []
    drops = 0
    # per fixture: index into out of the last survivor, and whether it
    # closed its possession
    prev_idx: dict[str, int] = {}
    prev_closed: dict[str, bool] = {}
    for e in events:
        fx = e.fixture_id
        if fx in prev_idx:
            prev = out[prev_idx[fx]]
            same_possession = (
                not prev_closed[fx] and prev.attacking_team == e.attacking_team
            )
            if same_possession and prev.player_id == e.player_id:
                drops += 1
                merged = prev
                if _is_kick_goal(e) or _is_completed_try(e):
                    merged = dataclasses.replace(
                        merged, category=e.category, action=e.action, completed=e.completed
                    )
                if e.ended_possession and not merged.ended_possession:
                    merged = dataclasses.replace(merged, ended_possession=True)
                if merged is not prev:
                    out[prev_idx[fx]] = merged
                prev_closed[fx] = _ends_possession(merged)
                continue
        out.append(e)
        prev_idx[fx] = len(out) - 1
        prev_closed[fx] = _ends_possession(e)
    return out, drops


def _resolve_outcome(group: list[RawEvent], fixture: str, num: int) -> OutcomeLabel:
    terminal = group[-1]
    try_scored = any(_is_completed_try(e) for e in group)
    if _is_kick_goal(terminal):
        kick = _canon(terminal.action)
        if kick == "conversion":
            return OutcomeLabel.CONVERTED_TRY if terminal.completed else OutcomeLabel.UNCONVERTED_TRY
        if try_scored:
            raise DataFormatError(
                f"fixture {fixture} possession {num}: try scored but the possession "
                f"ended with {terminal.action!r}, not a conversion attempt"
            )
        if kick == "penalty goal":
            return OutcomeLabel.PENALTY_GOAL if terminal.completed else OutcomeLabel.NO_POINTS
        if kick == "field goal":
            return OutcomeLabel.DROP_GOAL if terminal.completed else OutcomeLabel.NO_POINTS
        raise DataFormatError(
            f"fixture {fixture} possession {num}: unknown goal-kick action {terminal.action!r}"
        )
    if try_scored:
        raise DataFormatError(
            f"fixture {fixture} possession {num}: try scored but no conversion attempt follows"
        )
    return OutcomeLabel.NO_POINTS


def segment_possessions(events: list[RawEvent]) -> list[Action]:
    """Group filtered, deduped events into possessions and label outcomes.

    A possession closes on its terminating event (``ended_possession`` or a
    goal-kick attempt), when the attacking team changes, or when the
    fixture's stream ends; the latter two close it with no points scored.
    Possession numbers start at 1 within each fixture.
    """
    actions: list[Action] = []
    open_groups: dict[str, list[RawEvent]] = {}
    counters: dict[str, int] = {}

    def close(fixture: str) -> None:
        group = open_groups.pop(fixture, None)
        if not group:
            return
        counters[fixture] = counters.get(fixture, 0) + 1
        num = counters[fixture]
        outcome = _resolve_outcome(group, fixture, num)
        for e in group:
            actions.append(
                Action(
                    fixture_id=e.fixture_id,
                    attacking_team=e.attacking_team,
                    defending_team=e.defending_team,
                    player_id=e.player_id,
                    x=e.x,
                    y=e.y,
                    possession_num=num,
                    outcome=outcome,
                )
            )

    for e in events:
        group = open_groups.get(e.fixture_id)
        if group and group[-1].attacking_team != e.attacking_team:
            close(e.fixture_id)
        open_groups.setdefault(e.fixture_id, []).append(e)
        if _ends_possession(e):
            close(e.fixture_id)
    for fixture in list(open_groups):
        close(fixture)
    return actions


def partition(actions: list[Action], teams: list[str]) -> list[DataSubset]:
    """League subset plus attack and defence subsets for each team."""
    known = set(teams)
    for a in actions:
        if a.attacking_team not in known or a.defending_team not in known:
            raise DataFormatError(
                f"fixture {a.fixture_id}: team not in the team list "
                f"({a.attacking_team!r} vs {a.defending_team!r})"
            )
    subsets = [DataSubset(kind="league", team=None, actions=tuple(actions))]
    for t in teams:
        subsets.append(
            DataSubset(
                kind="attack",
                team=t,
                actions=tuple(a for a in actions if a.attacking_team == t),
            )
        )
    for t in teams:
        subsets.append(
            DataSubset(
                kind="defence",
                team=t,
                actions=tuple(a for a in actions if a.defending_team == t),
            )
        )
    return subsets


def run_pipeline(events: list[RawEvent]) -> tuple[list[Action], IngestReport]:
    """Filter, dedupe and segment in-memory events; fills report counters
    except rows_read and clamped_locations (the loader knows those)."""
    filtered = filter_categories(events)
    deduped, drops = dedupe_locations(filtered)
    actions = segment_possessions(deduped)
    counts = {name: 0 for name in OUTCOME_NAMES}
    seen: set[tuple[str, int]] = set()
    for a in actions:
        key = (a.fixture_id, a.possession_num)
        if key not in seen:
            seen.add(key)
            counts[OUTCOME_NAMES[a.outcome]] += 1
    report = IngestReport(
        rows_kept=len(deduped),
        dedupe_drops=drops,
        possessions=len(seen),
        outcome_counts=counts,
    )
    return actions, report


def preprocess(path: str | Path) -> tuple[list[Action], IngestReport]:
    """Full pipeline from a raw-event CSV to labelled actions."""
    events, clamped = load_events_csv(path)
    actions, report = run_pipeline(events)
    report.rows_read = len(events)
    report.clamped_locations = clamped
    return actions, report


_ACTION_COLUMNS = (
    "fixture_id",
    "attacking_team",
    "defending_team",
    "player_id",
    "x",
    "y",
    "possession_num",
    "outcome",
)

# pre-segmented exports use these spellings (matched case-insensitively)
_ACTION_ALIASES = {
    "player": "player_id",
    "player id": "player_id",
    "posnum": "possession_num",
    "poscat": "outcome",
}

_ACTION_DEFAULTS = {
    "fixture_id": "fixture-0",
    "attacking_team": "team-a",
    "defending_team": "team-b",
}


def save_actions_csv(actions: list[Action], path: str | Path) -> None:
    """Write processed actions; outcome is its integer code."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_ACTION_COLUMNS)
        for a in actions:
            writer.writerow(
                [
                    a.fixture_id,
                    a.attacking_team,
                    a.defending_team,
                    a.player_id,
                    repr(float(a.x)),
                    repr(float(a.y)),
                    a.possession_num,
                    int(a.outcome),
                ]
            )


def _parse_outcome(raw: str, line: int) -> OutcomeLabel:
    v = _canon(raw)
    if v in OUTCOME_NAMES:
        return OutcomeLabel(OUTCOME_NAMES.index(v))
    try:
        return OutcomeLabel(int(v))
    except ValueError:
        raise DataFormatError(f"line {line}: unknown outcome {raw!r}") from None


def load_actions_csv(path: str | Path) -> tuple[list[Action], int]:
    """Read processed or pre-segmented actions; returns (actions, clamped).

    Accepts the canonical columns written by ``save_actions_csv`` and the
    pre-segmented shape (player, x, y, PosNum, PosCat); fixture and team
    columns default to a single synthetic fixture when absent. Locations
    are clamped to the pitch like the raw loader. Actions sharing a
    (fixture, possession) must share attacking team and outcome.
    """
    actions: list[Action] = []
    clamped = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataFormatError(f"{path}: empty actions file")
        cols = [_ACTION_ALIASES.get(_canon(c), _canon(c)) for c in header]
        for required in ("player_id", "x", "y", "possession_num", "outcome"):
            if required not in cols:
                raise DataFormatError(f"{path}: missing required column {required!r}")
        idx = {c: i for i, c in enumerate(cols)}

        def get(row: list[str], col: str) -> str:
            if col in idx and idx[col] < len(row):
                return row[idx[col]]
            return _ACTION_DEFAULTS[col]

        for i, row in enumerate(reader):
            line = i + 2
            if not row:
                continue
            x = _parse_float(row[idx["x"]], "x", line)
            y = _parse_float(row[idx["y"]], "y", line)
            cx = min(max(x, X_MIN), X_MAX)
            cy = min(max(y, Y_MIN), Y_MAX)
            if cx != x or cy != y:
                clamped += 1
            num = int(_parse_float(row[idx["possession_num"]], "possession_num", line))
            if num < 1:
                raise DataFormatError(f"line {line}: possession_num must be >= 1, got {num}")
            actions.append(
                Action(
                    fixture_id=get(row, "fixture_id").strip(),
                    attacking_team=get(row, "attacking_team").strip(),
                    defending_team=get(row, "defending_team").strip(),
                    player_id=row[idx["player_id"]].strip(),
                    x=cx,
                    y=cy,
                    possession_num=num,
                    outcome=_parse_outcome(row[idx["outcome"]], line),
                )
            )
    _check_possession_homogeneity(actions)
    return actions, clamped


def _check_possession_homogeneity(actions: list[Action]) -> None:
    seen: dict[tuple[str, int], tuple[str, OutcomeLabel]] = {}
    for a in actions:
        key = (a.fixture_id, a.possession_num)
        val = (a.attacking_team, a.outcome)
        if key in seen and seen[key] != val:
            raise DataFormatError(
                f"fixture {key[0]} possession {key[1]}: inconsistent team or outcome"
            )
        seen.setdefault(key, val)
