"""Command-line pipeline: synth, preprocess, fit, derive-priors, surface, rate.

Every command resolves its settings from (in rising precedence) built-in
defaults, the EPV_OUT_DIR environment variable, a JSON config file, and
command-line flags, then records the resolved values in run_config.json so
a run can be reproduced from its output directory alone.

Exit codes: 0 success, 1 usage or configuration, 2 data error,
3 persisted-artifact mismatch.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    ArtifactError,
    ConfigError,
    DataFormatError,
    EpvkitError,
    MleConvergenceError,
)
from .ingest import Action, load_actions_csv, preprocess, save_actions_csv
from .mixture import league_prior, load_priors_csv, predictive, save_priors_csv
from .mixture.data import prepare_actions
from .mixture.dirichlet import derive_team_prior
from .mixture.gibbs import SamplerConfig, gibbs_fit, load_posterior, save_posterior
from .ratings import rate_players, save_ratings_csv, summary_table
from .surfaces import diff_grid, render_grid, save_grid, save_heatmaps
from .synth import (
    SyntheticSpec,
    generate_dataset,
    load_truth_csv,
    raw_event_rows,
    save_events_csv,
    save_truth_csv,
)


class _UsageError(Exception):
    """Bad invocation; reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one command invocation."""

    command: str
    seed: int | None = None
    chains: int = 4
    iters: int = 5000
    burn_in: int = 1000
    thin: int = 4
    resolution: float = 1.0
    top_k: int = 20
    png: bool = False
    subset: str | None = None
    model: str = "attack"
    law: str = "uniform"
    n: int = 1000
    teams: int = 2
    fixtures: int = 1
    players_per_team: int = 13
    input: str | None = None
    posterior: str | None = None
    priors: str | None = None
    league: str | None = None
    truth: str | None = None
    out_dir: str = "."

    def sampler_config(self) -> SamplerConfig:
        if self.seed is None:
            raise ConfigError("a seed is required for this stage (--seed or config file)")
        cfg = SamplerConfig(
            seed=self.seed,
            chains=self.chains,
            iterations=self.iters,
            burn_in=self.burn_in,
            thinning=self.thin,
        )
        cfg.validate()
        return cfg


_CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)} - {"command"}


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        path = Path(cfg_path)
        if not path.is_file():
            raise _UsageError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {path} is not valid JSON: {err}") from err
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        unknown = sorted(set(loaded) - _CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(loaded)
    for key, value in vars(args).items():
        if key in ("func", "command", "config") or value is None:
            continue
        merged[key] = value
    if not merged.get("out_dir"):
        merged["out_dir"] = os.environ.get("EPV_OUT_DIR") or "."
    return RunConfig(command=args.command, **merged)


def _require_file(value: str | None, what: str) -> Path:
    if value is None:
        raise _UsageError(f"{what} is required")
    path = Path(value)
    if not path.is_file():
        raise _UsageError(f"{what} not found: {path}")
    return path


def _require_dir(value: str | None, what: str) -> Path:
    if value is None:
        raise _UsageError(f"{what} is required")
    path = Path(value)
    if not path.is_dir():
        raise _UsageError(f"{what} not found: {path}")
    return path


def _prepare_out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record = dataclasses.asdict(cfg)
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    (out / "run_config.json").write_text(text, encoding="utf-8")
    return out


def _load_actions(path: Path) -> list[Action]:
    actions, clamped = load_actions_csv(path)
    if clamped:
        print(f"warning: {clamped} locations clamped to the pitch boundary", file=sys.stderr)
    return actions


def _filter_subset(actions: list[Action], subset: str) -> list[Action]:
    team, sep, kind = subset.rpartition(":")
    if not sep or not team or kind not in ("attack", "defence"):
        raise _UsageError("subset must look like TEAM:attack or TEAM:defence")
    if kind == "attack":
        chosen = [a for a in actions if a.attacking_team == team]
    else:
        chosen = [a for a in actions if a.defending_team == team]
    if not chosen:
        raise DataFormatError(f"no actions match subset {subset!r}")
    return chosen


def cmd_preprocess(args: argparse.Namespace, cfg: RunConfig) -> int:
    raw = _require_file(cfg.input, "raw events CSV")
    out = _prepare_out(cfg)
    actions, report = preprocess(raw)
    save_actions_csv(actions, out / "actions.csv")
    report.save(out / "ingest_report.json")
    print(
        f"rows read {report.rows_read}, kept {report.rows_kept}, "
        f"duplicates dropped {report.dedupe_drops}, "
        f"locations clamped {report.clamped_locations}"
    )
    print(f"possessions {report.possessions}")
    print(f"actions written to {out / 'actions.csv'}")
    return 0


def cmd_fit(args: argparse.Namespace, cfg: RunConfig) -> int:
    actions_path = _require_file(cfg.input, "actions CSV")
    sampler = cfg.sampler_config()
    out = _prepare_out(cfg)
    actions = _load_actions(actions_path)
    if cfg.subset:
        actions = _filter_subset(actions, cfg.subset)
    if cfg.priors:
        alpha = load_priors_csv(_require_file(cfg.priors, "prior CSV"))
    else:
        alpha = league_prior()
    post = gibbs_fit(prepare_actions(actions), alpha, sampler)
    save_posterior(post, out / "posterior")
    for warning in post.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        f"fitted {sampler.chains} chains x {sampler.kept_per_chain} kept draws "
        f"on {len(actions)} actions"
    )
    print(f"max split R-hat {post.rhat.max():.4f}; min ESS {post.ess.min():.1f}")
    print(f"posterior written to {out / 'posterior'}")
    return 0


def cmd_derive_priors(args: argparse.Namespace, cfg: RunConfig) -> int:
    post_dir = _require_dir(cfg.posterior, "posterior directory")
    out = _prepare_out(cfg)
    post = load_posterior(post_dir)
    alpha = derive_team_prior(post)
    save_priors_csv(alpha, out / "team_prior.csv")
    print(f"team prior written to {out / 'team_prior.csv'}")
    return 0


def cmd_surface(args: argparse.Namespace, cfg: RunConfig) -> int:
    post_dir = _require_dir(cfg.posterior, "posterior directory")
    out = _prepare_out(cfg)
    post = load_posterior(post_dir)
    grid = render_grid(post, resolution=cfg.resolution)
    save_grid(grid, out / "surface.csv")
    written = [out / "surface.csv"]
    grids = [("surface", grid)]
    if cfg.league:
        league_dir = _require_dir(cfg.league, "league posterior directory")
        league_grid = render_grid(load_posterior(league_dir), resolution=cfg.resolution)
        diff = diff_grid(grid, league_grid, model=cfg.model)
        save_grid(diff, out / "diff.csv")
        written.append(out / "diff.csv")
        grids.append(("diff", diff))
    if cfg.png:
        for stem, g in grids:
            written.extend(save_heatmaps(g, out / "plots", stem=stem))
    print(f"{grid.n_rows} grid rows at {cfg.resolution} m resolution")
    for path in written:
        print(f"written {path}")
    return 0


def cmd_rate(args: argparse.Namespace, cfg: RunConfig) -> int:
    actions_path = _require_file(cfg.input, "actions CSV")
    post_dir = _require_dir(cfg.posterior, "posterior directory")
    if cfg.top_k < 1:
        raise _UsageError("top-k must be at least 1")
    out = _prepare_out(cfg)
    actions = _load_actions(actions_path)
    post = load_posterior(post_dir)
    ratings = rate_players(actions, post)
    save_ratings_csv(ratings, out / "ratings.csv")
    top = summary_table(ratings, cfg.top_k)
    width = max([len(r.player_id) for r in top] + [6])
    print(f"{'rank':>4}  {'player':<{width}}  {'team':<12}  {'rating':>8}  {'actions':>7}")
    for i, r in enumerate(top, start=1):
        print(
            f"{i:>4}  {r.player_id:<{width}}  {r.team:<12}  "
            f"{r.ae_rating:>8.4f}  {r.actions_count:>7}"
        )
    print(f"ratings written to {out / 'ratings.csv'}")
    return 0


def cmd_synth(args: argparse.Namespace, cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise ConfigError("a seed is required for this stage (--seed or config file)")
    if cfg.truth:
        truth = load_truth_csv(_require_file(cfg.truth, "ground-truth CSV"))
    else:
        truth = predictive(league_prior())
    spec = SyntheticSpec(
        truth=truth,
        n_observations=cfg.n,
        seed=cfg.seed,
        location_law=cfg.law,
        n_teams=cfg.teams,
        n_fixtures=cfg.fixtures,
        players_per_team=cfg.players_per_team,
    )
    out = _prepare_out(cfg)
    dataset = generate_dataset(spec)
    save_truth_csv(spec.truth, out / "truth.csv")
    save_actions_csv(list(dataset.actions), out / "actions.csv")
    save_events_csv(raw_event_rows(dataset.actions, include_decoys=True), out / "raw_events.csv")
    print(
        f"generated {dataset.n} observations over {spec.n_fixtures} fixtures "
        f"and {spec.n_teams} teams"
    )
    for name in ("truth.csv", "actions.csv", "raw_events.csv"):
        print(f"written {out / name}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", dest="out_dir", default=None, metavar="DIR",
                   help="output directory (default: $EPV_OUT_DIR, else .)")
    p.add_argument("--config", default=None, metavar="JSON",
                   help="JSON config file; flags override its values")


def build_parser() -> _Parser:
    parser = _Parser(prog="epvkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("preprocess", help="turn raw coded events into possession actions")
    p.add_argument("input", nargs="?", default=None, metavar="RAW_CSV")
    _add_common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("fit", help="sample the mixture posterior from actions")
    p.add_argument("input", nargs="?", default=None, metavar="ACTIONS_CSV")
    p.add_argument("--priors", default=None, metavar="CSV",
                   help="prior table (default: built-in league prior)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--chains", type=int, default=None)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    p.add_argument("--thin", type=int, default=None)
    p.add_argument("--subset", default=None, metavar="TEAM:attack|defence",
                   help="fit one team's attacking or defending subset")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("derive-priors", help="estimate a team prior from a league posterior")
    p.add_argument("posterior", nargs="?", default=None, metavar="POSTERIOR_DIR")
    _add_common(p)
    p.set_defaults(func=cmd_derive_priors)

    p = sub.add_parser("surface", help="render probability and value grids")
    p.add_argument("posterior", nargs="?", default=None, metavar="POSTERIOR_DIR")
    p.add_argument("--resolution", type=float, default=None, metavar="METRES")
    p.add_argument("--league", default=None, metavar="POSTERIOR_DIR",
                   help="league posterior to difference against")
    p.add_argument("--model", choices=("attack", "defence"), default=None,
                   help="reading convention recorded on the difference grid")
    p.add_argument("--png", action="store_true", default=None,
                   help="also render heatmap PNGs")
    _add_common(p)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("rate", help="score players actual-vs-expected")
    p.add_argument("input", nargs="?", default=None, metavar="ACTIONS_CSV")
    p.add_argument("posterior", nargs="?", default=None, metavar="POSTERIOR_DIR")
    p.add_argument("--top-k", dest="top_k", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("synth", help="generate a synthetic dataset with known truth")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n", type=int, default=None, help="observation count")
    p.add_argument("--teams", type=int, default=None)
    p.add_argument("--fixtures", type=int, default=None)
    p.add_argument("--players-per-team", dest="players_per_team", type=int, default=None)
    p.add_argument("--law", choices=("uniform", "central"), default=None,
                   help="location sampling law")
    p.add_argument("--truth", default=None, metavar="CSV",
                   help="ground-truth table (default: league prior predictive)")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except SystemExit as err:  # argparse --help exits directly
        return 0 if err.code in (0, None) else 1
    try:
        cfg = _resolve_config(args)
        return args.func(args, cfg)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except DataFormatError as err:
        print(f"data error: {err}", file=sys.stderr)
        return 2
    except MleConvergenceError as err:
        print(f"estimation error: {err}", file=sys.stderr)
        return 2
    except ArtifactError as err:
        print(f"artifact error: {err}", file=sys.stderr)
        return 3
    except EpvkitError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())
