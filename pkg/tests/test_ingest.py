"""Preprocessing pipeline: filtering, dedupe, segmentation, partition, IO."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epvkit import DataFormatError, OutcomeLabel
from epvkit.ingest import (
    Action,
    RawEvent,
    dedupe_locations,
    filter_categories,
    load_actions_csv,
    load_events_csv,
    partition,
    preprocess,
    run_pipeline,
    save_actions_csv,
    segment_possessions,
)


def ev(
    player="p1",
    category="Move Team",
    action="Complete",
    x=10.0,
    y=20.0,
    completed=True,
    ended=False,
    fixture="f1",
    att="A",
    dfn="B",
    seq=0,
    line=0,
):
    return RawEvent(
        fixture_id=fixture,
        attacking_team=att,
        defending_team=dfn,
        player_id=player,
        category=category,
        action=action,
        x=x,
        y=y,
        completed=completed,
        ended_possession=ended,
        sequence_index=seq,
        source_line=line,
    )


def seqd(events):
    return [
        RawEvent(**{**e.__dict__, "sequence_index": i}) for i, e in enumerate(events)
    ]


class TestFilter:
    def test_drops_non_kept_category(self):
        assert filter_categories([ev(category="Tackle")]) == []

    def test_keeps_incomplete_only_if_terminal(self):
        gone = ev(category="Move Team", completed=False, ended=False)
        kept = ev(category="Move Team", completed=False, ended=True)
        assert filter_categories([gone, kept]) == [kept]

    def test_empty(self):
        assert filter_categories([]) == []

    def test_case_and_whitespace_insensitive(self):
        assert len(filter_categories([ev(category="  MOVE team ")])) == 1
        assert filter_categories([ev(category="missed TACKLE")]) == []

    def test_unknown_category_names_value_and_line(self):
        with pytest.raises(DataFormatError, match=r"line 41.*'Scrum'"):
            filter_categories([ev(category="Scrum", line=41)])

    def test_preserves_order(self):
        events = [ev(player=f"p{i}", y=float(i)) for i in range(6)]
        assert filter_categories(events) == events


class TestDedupe:
    def test_duplicate_collapse(self):
        a, b = ev(x=9, y=4), ev(x=9, y=4)
        out, drops = dedupe_locations(seqd([a, b]))
        assert len(out) == 1 and drops == 1
        assert (out[0].x, out[0].y) == (9, 4)

    def test_non_consecutive_unchanged(self):
        events = seqd([ev(player="p1"), ev(player="p2"), ev(player="p1")])
        out, drops = dedupe_locations(events)
        assert out == events and drops == 0

    def test_triple_collapses_to_first(self):
        events = seqd([ev(y=1.0), ev(y=2.0), ev(y=3.0)])
        out, drops = dedupe_locations(events)
        assert [e.y for e in out] == [1.0] and drops == 2

    def test_idempotent(self):
        events = seqd(
            [ev(player=p, y=float(i)) for i, p in enumerate("aabbbaba")]
        )
        once, _ = dedupe_locations(events)
        twice, drops = dedupe_locations(once)
        assert twice == once and drops == 0

    def test_new_possession_resets(self):
        # same player either side of a possession end is not a duplicate
        events = seqd([ev(ended=True), ev()])
        out, drops = dedupe_locations(events)
        assert len(out) == 2 and drops == 0

    def test_team_change_resets(self):
        events = seqd([ev(att="A", dfn="B"), ev(att="B", dfn="A")])
        out, drops = dedupe_locations(events)
        assert len(out) == 2 and drops == 0

    def test_fixtures_independent(self):
        events = seqd([ev(fixture="f1"), ev(fixture="f2"), ev(fixture="f1")])
        out, drops = dedupe_locations(events)
        assert drops == 1 and [e.fixture_id for e in out] == ["f1", "f2"]

    def test_dropped_goal_kick_keeps_possession_outcome(self):
        # the same player runs then kicks: the kick's location coding is the
        # duplicate, but its result still decides the possession
        run = ev(category="Move Self", action="Run", x=30, y=95)
        kick = ev(category="Kick Goal", action="Penalty Goal", x=30, y=95, ended=True)
        out, drops = dedupe_locations(seqd([run, kick]))
        assert drops == 1 and len(out) == 1
        actions = segment_possessions(out)
        assert [a.outcome for a in actions] == [OutcomeLabel.PENALTY_GOAL]

    def test_dropped_terminal_flag_inherited(self):
        events = seqd([ev(), ev(ended=True), ev(player="p2")])
        out, _ = dedupe_locations(events)
        actions = segment_possessions(out)
        assert [a.possession_num for a in actions] == [1, 2]


class TestSegmentation:
    def test_sample_possession_shape(self):
        # eight attacking actions ending in a handover: one possession, all
        # labelled no-points
        rows = [
            ("3107", 9, 4), ("21716", 9, 6), ("1983", 14, 11), ("2904", 22, 13),
            ("11439", 12, 12), ("21795", 37, 16), ("20567", 36, 24), ("2904", 54, 35),
        ]
        events = seqd(
            [
                ev(player=p, x=float(x), y=float(y), att="St Helens", dfn="Salford",
                   ended=(i == len(rows) - 1))
                for i, (p, x, y) in enumerate(rows)
            ]
        )
        actions = segment_possessions(events)
        assert len(actions) == 8
        assert {a.possession_num for a in actions} == {1}
        assert {a.outcome for a in actions} == {OutcomeLabel.NO_POINTS}
        assert actions[0].player_id == "3107" and actions[0].x == 9 and actions[0].y == 4

    def test_possession_numbers_increment(self):
        events = seqd([ev(ended=True), ev(player="p2", ended=True)])
        actions = segment_possessions(events)
        assert [a.possession_num for a in actions] == [1, 2]

    @pytest.mark.parametrize(
        "action,completed,expected",
        [
            ("Penalty Goal", True, OutcomeLabel.PENALTY_GOAL),
            ("Penalty Goal", False, OutcomeLabel.NO_POINTS),
            ("Field Goal", True, OutcomeLabel.DROP_GOAL),
            ("Field Goal", False, OutcomeLabel.NO_POINTS),
            ("Conversion", True, OutcomeLabel.CONVERTED_TRY),
            ("Conversion", False, OutcomeLabel.UNCONVERTED_TRY),
        ],
    )
    def test_goal_kick_outcomes(self, action, completed, expected):
        events = seqd(
            [
                ev(),
                ev(player="p2", category="Kick Goal", action=action,
                   completed=completed, ended=True),
            ]
        )
        actions = segment_possessions(events)
        assert len(actions) == 2
        assert {a.outcome for a in actions} == {expected}

    def test_try_then_conversion(self):
        events = seqd(
            [
                ev(action="Try", y=100.0),
                ev(player="p2", category="Kick Goal", action="Conversion",
                   completed=True, ended=True),
            ]
        )
        actions = segment_possessions(events)
        assert {a.outcome for a in actions} == {OutcomeLabel.CONVERTED_TRY}

    def test_team_change_closes_as_no_points(self):
        events = seqd([ev(att="A", dfn="B"), ev(att="B", dfn="A", ended=True)])
        actions = segment_possessions(events)
        assert [(a.attacking_team, a.possession_num) for a in actions] == [("A", 1), ("B", 2)]
        assert actions[0].outcome is OutcomeLabel.NO_POINTS

    def test_stream_end_closes_as_no_points(self):
        actions = segment_possessions(seqd([ev()]))
        assert [a.outcome for a in actions] == [OutcomeLabel.NO_POINTS]

    def test_opposition_error_does_not_split(self):
        # attacking team retains the ball across an opposition error: the
        # stream stays with the same attacking team, so one possession
        events = seqd([ev(), ev(player="p2"), ev(player="p3", ended=True)])
        actions = segment_possessions(events)
        assert {a.possession_num for a in actions} == {1}

    def test_try_without_conversion_is_conflict(self):
        events = seqd([ev(action="Try", ended=True)])
        with pytest.raises(DataFormatError, match=r"fixture f1 possession 1"):
            segment_possessions(events)

    def test_try_then_wrong_kick_is_conflict(self):
        events = seqd(
            [
                ev(action="Try"),
                ev(player="p2", category="Kick Goal", action="Penalty Goal",
                   completed=True, ended=True),
            ]
        )
        with pytest.raises(DataFormatError, match="not a conversion"):
            segment_possessions(events)

    def test_unknown_goal_kick_action(self):
        events = seqd([ev(category="Kick Goal", action="Spiral", ended=True)])
        with pytest.raises(DataFormatError, match="Spiral"):
            segment_possessions(events)

    def test_outcome_homogeneity_property(self):
        events = seqd(
            [ev(player=f"p{i}", ended=(i % 3 == 2)) for i in range(12)]
        )
        actions = segment_possessions(events)
        by_pos = {}
        for a in actions:
            by_pos.setdefault((a.fixture_id, a.possession_num), set()).add(a.outcome)
        assert all(len(v) == 1 for v in by_pos.values())


class TestPartition:
    def _actions(self, teams, n=24):
        out = []
        for i in range(n):
            att = teams[i % len(teams)]
            dfn = teams[(i + 1) % len(teams)]
            out.append(
                Action(
                    fixture_id=f"f{i % 3}",
                    attacking_team=att,
                    defending_team=dfn,
                    player_id=f"p{i}",
                    x=10.0,
                    y=20.0,
                    possession_num=1 + i,
                    outcome=OutcomeLabel.NO_POINTS,
                )
            )
        return out

    def test_twelve_teams_make_25_subsets(self):
        teams = [f"t{i}" for i in range(12)]
        subsets = partition(self._actions(teams), teams)
        assert len(subsets) == 25
        assert subsets[0].kind == "league"

    def test_single_team_degenerate(self):
        # degenerate one-team league: self-play, 3 subsets
        actions = self._actions(["t0", "t0"])
        subsets = partition(actions, ["t0"])
        assert len(subsets) == 3

    def test_sizes_partition(self):
        teams = [f"t{i}" for i in range(4)]
        actions = self._actions(teams, n=37)
        subsets = partition(actions, teams)
        league = subsets[0]
        attack = [s for s in subsets if s.kind == "attack"]
        defence = [s for s in subsets if s.kind == "defence"]
        assert len(league.actions) == 37
        assert sum(len(s.actions) for s in attack) == 37
        assert sum(len(s.actions) for s in defence) == 37

    def test_every_action_in_exactly_one_attack_subset(self):
        teams = [f"t{i}" for i in range(4)]
        actions = self._actions(teams, n=20)
        subsets = partition(actions, teams)
        for a in actions:
            holders = [
                s for s in subsets if s.kind == "attack" and a in s.actions
            ]
            assert len(holders) == 1 and holders[0].team == a.attacking_team

    def test_unknown_team_rejected(self):
        actions = self._actions(["t0", "t1"])
        with pytest.raises(DataFormatError):
            partition(actions, ["t0"])

    def test_labels(self):
        subsets = partition([], ["t0"])
        assert [s.label for s in subsets] == ["league", "attack:t0", "defence:t0"]


class TestCsvIO:
    RAW_HEADER = (
        "fixture_id,attacking_team,defending_team,player_id,category,action,"
        "x,y,completed,ended_possession\n"
    )

    def test_load_events_and_clamp(self, tmp_path):
        path = tmp_path / "events.csv"
        path.write_text(
            self.RAW_HEADER
            + "f1,A,B,p1,Move Team,Complete,10,20,true,false\n"
            + "f1,A,B,p2,Move Team,Complete,75,-12,TRUE,False\n"
        )
        events, clamped = load_events_csv(path)
        assert len(events) == 2 and clamped == 1
        assert (events[1].x, events[1].y) == (70.0, -10.0)
        assert events[0].source_line == 2

    def test_missing_column(self, tmp_path):
        path = tmp_path / "events.csv"
        path.write_text("fixture_id,x,y\nf1,1,2\n")
        with pytest.raises(DataFormatError, match="missing required columns"):
            load_events_csv(path)

    def test_bad_boolean(self, tmp_path):
        path = tmp_path / "events.csv"
        path.write_text(self.RAW_HEADER + "f1,A,B,p1,Move Team,Complete,1,2,maybe,false\n")
        with pytest.raises(DataFormatError, match="line 2.*maybe"):
            load_events_csv(path)

    def test_sequence_must_increase_within_fixture(self, tmp_path):
        path = tmp_path / "events.csv"
        path.write_text(
            self.RAW_HEADER.rstrip("\n") + ",sequence_index\n"
            "f1,A,B,p1,Move Team,Complete,1,2,true,false,5\n"
            "f1,A,B,p2,Move Team,Complete,1,2,true,false,5\n"
        )
        with pytest.raises(DataFormatError, match="not increasing"):
            load_events_csv(path)

    def test_preprocess_report(self, tmp_path):
        path = tmp_path / "events.csv"
        path.write_text(
            self.RAW_HEADER
            + "f1,A,B,p1,Tackle,Made,10,20,true,false\n"
            + "f1,A,B,p1,Move Team,Complete,10,20,true,false\n"
            + "f1,A,B,p1,Move Self,Run,10,20,true,false\n"
            + "f1,A,B,p2,Kick Goal,Penalty Goal,30,95,true,true\n"
            + "f1,A,B,p3,Move Team,Complete,80,20,true,true\n"
        )
        actions, report = preprocess(path)
        assert report.rows_read == 5
        assert report.rows_kept == 3  # tackle filtered, p1 duplicate dropped
        assert report.dedupe_drops == 1
        assert report.clamped_locations == 1
        assert report.possessions == 2
        assert report.outcome_counts["penalty_goal"] == 1
        assert report.outcome_counts["no_points"] == 1
        data = json.loads(report.to_json())
        assert data["rows_kept"] == 3

    def test_actions_roundtrip(self, tmp_path):
        events = seqd(
            [ev(player=f"p{i}", x=1.5 * i, y=2.5 * i, ended=(i == 4)) for i in range(5)]
        )
        actions = segment_possessions(events)
        path = tmp_path / "actions.csv"
        save_actions_csv(actions, path)
        loaded, clamped = load_actions_csv(path)
        assert clamped == 0 and loaded == actions

    def test_presegmented_aliases(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text(
            "Player,x,y,PosNum,PosCat\n"
            "3107,9,4,1,0\n"
            "21716,9,6,1,0\n"
        )
        actions, _ = load_actions_csv(path)
        assert len(actions) == 2
        assert actions[0].player_id == "3107"
        assert actions[0].outcome is OutcomeLabel.NO_POINTS
        assert actions[0].fixture_id == "fixture-0"

    def test_outcome_names_accepted(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("player,x,y,posnum,poscat\np1,1,2,1,penalty_goal\n")
        actions, _ = load_actions_csv(path)
        assert actions[0].outcome is OutcomeLabel.PENALTY_GOAL

    def test_homogeneity_enforced(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text(
            "player,x,y,posnum,poscat\n"
            "p1,1,2,1,0\n"
            "p2,1,2,1,2\n"
        )
        with pytest.raises(DataFormatError, match="inconsistent"):
            load_actions_csv(path)


@settings(max_examples=40)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(["p1", "p2", "p3"]),
            st.booleans(),
            st.sampled_from(["Move Team", "Move Self", "Tackle"]),
        ),
        max_size=30,
    )
)
def test_pipeline_properties(rows):
    events = seqd(
        [ev(player=p, category=c, ended=ended) for p, ended, c in rows]
    )
    actions, report = run_pipeline(events)
    # dedupe idempotence on the filtered stream
    filtered = filter_categories(events)
    once, _ = dedupe_locations(filtered)
    twice, drops = dedupe_locations(once)
    assert twice == once and drops == 0
    # possession numbering is 1..n per fixture and outcomes are homogeneous
    nums = sorted({a.possession_num for a in actions})
    assert nums == list(range(1, len(nums) + 1))
    assert report.possessions == len(nums)
