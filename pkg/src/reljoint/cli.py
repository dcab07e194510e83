"""Command-line pipeline: mine, candidates, solve, eval, synth, export-lp.

Every switch mirrors a RunConfig field; a JSON config file can preset any
of them and explicit flags win. Exit codes: 0 success, 1 usage or
configuration problem, 2 unreadable or malformed data.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import click

from . import candidates as cand
from . import clues as clue_mod
from . import constraints as cons
from . import evaluate as ev
from . import ilp
from . import synth as synth_mod
from .kb import TripleFileError, load_triples, read_triples


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    kappa: float = -3.0
    uniq_threshold: float = 0.8
    conf_threshold: float = 0.1
    top_k: int = 3
    alpha: float = 1.0
    mode: str = "hard"
    max_relations: int = 0
    time_budget_ms: int = 60_000
    seed: int = 0

    def validate(self) -> None:
        if self.kappa >= 0:
            raise ConfigError(f"kappa must be negative, got {self.kappa}")
        if not 0.0 < self.uniq_threshold <= 1.0:
            raise ConfigError(f"uniq_threshold must be in (0,1], got {self.uniq_threshold}")
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise ConfigError(f"conf_threshold must be in [0,1], got {self.conf_threshold}")
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.mode not in ("hard", "soft"):
            raise ConfigError(f"mode must be hard or soft, got {self.mode!r}")
        if self.max_relations < 0:
            raise ConfigError(f"max_relations must be >= 0, got {self.max_relations}")
        if self.time_budget_ms < 0:
            raise ConfigError(f"time_budget_ms must be >= 0, got {self.time_budget_ms}")


def _resolve_config(config_path: str | None, overrides: dict) -> RunConfig:
    """Config-file values override defaults; explicit flags override both."""
    values: dict = {}
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as handle:
                loaded = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {config_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {config_path} must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    try:
        config = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def _load_clue_files(paths: tuple[str, ...]) -> clue_mod.ClueSet:
    if not paths:
        return clue_mod.ClueSet()
    sets = [clue_mod.load_clue_file(p) for p in paths]
    return sets[0] if len(sets) == 1 else clue_mod.merge_clue_sets(*sets)


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")


@click.group()
def cli() -> None:
    """Joint inference over relation predictions with KB-mined clues."""


_config_option = click.option("--config", "config_path", type=click.Path(), default=None)


@cli.command()
@_config_option
@click.option("--triples", "triples_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--kappa", type=float, default=None)
@click.option("--uniq-threshold", type=float, default=None)
def mine(config_path, triples_path, out_path, kappa, uniq_threshold):
    """Mine type and uniqueness clues from a KB triple file."""
    config = _resolve_config(config_path, {"kappa": kappa, "uniq_threshold": uniq_threshold})
    kb = load_triples(triples_path)
    clues = clue_mod.mine_clues(kb, config.kappa, config.uniq_threshold)
    clue_mod.save_clue_file(clues, out_path)
    counts = clues.counts()
    click.echo(
        "mined "
        + " ".join(f"{kind}={counts[kind]}" for kind in clue_mod.ALL_KINDS)
        + f" from {len(kb)} facts"
    )


@cli.command("candidates")
@_config_option
@click.option("--predictions", "predictions_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--top-k", type=int, default=None)
@click.option("--conf-threshold", type=float, default=None)
def candidates_cmd(config_path, predictions_path, out_path, top_k, conf_threshold):
    """Aggregate mention scores into per-pair candidate sets."""
    config = _resolve_config(
        config_path, {"top_k": top_k, "conf_threshold": conf_threshold}
    )
    mentions = cand.load_predictions(predictions_path)
    pairs = cand.build_pair_candidates(mentions, config.top_k, config.conf_threshold)
    payload = {
        pc.pair_id: {
            "subject": pc.subject,
            "object": pc.object,
            "candidates": {
                rel: {
                    "conf": c.conf,
                    "max_mention": c.max_mention,
                    "supporting_mentions": list(c.supporting_mentions),
                }
                for rel, c in sorted(pc.candidates.items())
            },
        }
        for pc in pairs
    }
    _write_json(Path(out_path), payload)
    click.echo(f"{len(pairs)} pairs with candidates out of {len(mentions)} pairs seen")


def _build_pipeline(predictions_path, clue_paths, config, families):
    mentions = cand.load_predictions(predictions_path)
    pairs = cand.build_pair_candidates(mentions, config.top_k, config.conf_threshold)
    clues = _load_clue_files(clue_paths)
    if families:
        clues = clues.restrict(families.split(","))
    if config.max_relations:
        clues = clue_mod.prune_clues(clues, pairs, config.max_relations)
    return mentions, pairs, clues


def _build_model(pairs, clues, config):
    vars, hard = cons.generate_hard(pairs, clues)
    soft = None
    if config.mode == "soft":
        hard, soft = cons.soften(vars, hard, config.alpha)
    model = ilp.build_model(vars, hard, soft)
    return vars, hard, soft, model


@cli.command()
@_config_option
@click.option("--predictions", "predictions_path", required=True, type=click.Path())
@click.option("--clues", "clue_paths", multiple=True, type=click.Path())
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
@click.option("--method", type=click.Choice(["ilp", "mintzpp", "rule"]), default="ilp")
@click.option("--mode", type=click.Choice(["hard", "soft"]), default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--top-k", type=int, default=None)
@click.option("--conf-threshold", type=float, default=None)
@click.option("--max-relations", type=int, default=None)
@click.option("--time-budget-ms", type=int, default=None)
@click.option("--families", type=str, default=None, help="comma-separated clue families to keep")
@click.option("--dump-constraints", "dump_path", type=click.Path(), default=None)
def solve(
    config_path,
    predictions_path,
    clue_paths,
    out_dir,
    method,
    mode,
    alpha,
    top_k,
    conf_threshold,
    max_relations,
    time_budget_ms,
    families,
    dump_path,
):
    """Select a consistent prediction set and write it with a constraint census."""
    config = _resolve_config(
        config_path,
        {
            "mode": mode,
            "alpha": alpha,
            "top_k": top_k,
            "conf_threshold": conf_threshold,
            "max_relations": max_relations,
            "time_budget_ms": time_budget_ms,
        },
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mentions, pairs, clues = _build_pipeline(predictions_path, clue_paths, config, families)

    census_payload: dict = {
        "method": method,
        "mode": config.mode if method == "ilp" else None,
        "pairs_with_candidates": len(pairs),
        "clues": clues.counts(),
    }
    if dump_path and method != "ilp":
        raise ConfigError("--dump-constraints is only meaningful with --method ilp")
    if method == "mintzpp":
        ranked = ev.mintzpp(mentions)
    elif method == "rule":
        ranked = ev.rule_based(pairs, clues)
    else:
        vars, hard, soft, model = _build_model(pairs, clues, config)
        if dump_path:
            cons.dump_constraints(dump_path, vars, hard, soft)
        solution = ilp.solve(model, config.time_budget_ms)
        ranked = ev.ranked_from_solution(vars, solution)
        census_payload.update(
            {
                "variables": len(vars),
                "aux_variables": len(soft.aux_vars) if soft else 0,
                "constraints": cons.census(hard, soft),
                "solver": {
                    "components": solution.stats.components,
                    "nodes": solution.stats.nodes,
                    "optimal": solution.optimal,
                    "objective": solution.objective_value,
                },
            }
        )
    ev.write_ranked_predictions(out / "predictions.tsv", ranked)
    _write_json(out / "census.json", census_payload)
    click.echo(f"{len(ranked)} predictions -> {out / 'predictions.tsv'}")


@cli.command("eval")
@_config_option
@click.option("--predictions", "predictions_path", required=True, type=click.Path())
@click.option("--gold", "gold_path", required=True, type=click.Path())
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
@click.option("--baseline", "baseline_path", type=click.Path(), default=None)
def eval_cmd(config_path, predictions_path, gold_path, out_dir, baseline_path):
    """Precision-recall curve and peak F1 against gold; optional diff."""
    _resolve_config(config_path, {})
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    predictions = ev.read_ranked_predictions(predictions_path)
    gold = {(t.subject, t.relation, t.object) for t in read_triples(gold_path)}
    if not gold:
        raise ValueError(f"gold file {gold_path} holds no triples")
    curve = ev.pr_curve(predictions, gold)
    peak = ev.peak_f1(curve)
    ev.write_pr_csv(out / "pr_curve.csv", curve)
    summary = {
        "predictions": len(predictions),
        "gold": len(gold),
        "peak": {
            "precision": peak.precision,
            "recall": peak.recall,
            "f1": peak.f1,
            "rank": peak.rank,
        },
    }
    _write_json(out / "summary.json", summary)
    if baseline_path:
        baseline = ev.read_ranked_predictions(baseline_path)
        diff = ev.diff_analysis(baseline, predictions, gold)
        _write_json(
            out / "diff.json",
            {
                "eliminated": diff.eliminated,
                "corrected": diff.corrected,
                "introduced": diff.introduced,
                "details": diff.details,
            },
        )
    click.echo(
        f"peak F1 {peak.f1:.4f} (P {peak.precision:.4f}, R {peak.recall:.4f}) over {len(gold)} gold"
    )


@cli.command()
@_config_option
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
@click.option("--pairs", type=int, default=500)
@click.option("--noise", type=float, default=0.3)
@click.option("--mode", "world_mode", type=click.Choice(["conflict", "riedel"]), default="conflict")
@click.option("--seed", type=int, default=None)
@click.option("--mentions-min", type=int, default=1)
@click.option("--mentions-max", type=int, default=3)
def synth(config_path, out_dir, pairs, noise, world_mode, seed, mentions_min, mentions_max):
    """Generate a seeded synthetic world (KB, gold task, noisy mentions)."""
    config = _resolve_config(config_path, {"seed": seed})
    try:
        synth_config = synth_mod.SynthConfig(
            seed=config.seed,
            pairs=pairs,
            noise=noise,
            mode=world_mode,
            mentions_per_pair=(mentions_min, mentions_max),
        )
    except synth_mod.SynthConfigError as exc:
        raise ConfigError(str(exc)) from exc
    world = synth_mod.generate(synth_config, out_dir)
    click.echo(
        f"world with {world.fact_count} facts and {world.pair_count} task pairs in {out_dir}"
    )


@cli.command("export-lp")
@_config_option
@click.option("--predictions", "predictions_path", required=True, type=click.Path())
@click.option("--clues", "clue_paths", multiple=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--mode", type=click.Choice(["hard", "soft"]), default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--top-k", type=int, default=None)
@click.option("--conf-threshold", type=float, default=None)
@click.option("--max-relations", type=int, default=None)
@click.option("--families", type=str, default=None)
def export_lp_cmd(
    config_path,
    predictions_path,
    clue_paths,
    out_path,
    mode,
    alpha,
    top_k,
    conf_threshold,
    max_relations,
    families,
):
    """Write the model as an LP text file for an external solver."""
    config = _resolve_config(
        config_path,
        {
            "mode": mode,
            "alpha": alpha,
            "top_k": top_k,
            "conf_threshold": conf_threshold,
            "max_relations": max_relations,
        },
    )
    _mentions, pairs, clues = _build_pipeline(predictions_path, clue_paths, config, families)
    _vars, _hard, _soft, model = _build_model(pairs, clues, config)
    ilp.export_lp(model, out_path)
    click.echo(f"{model.num_vars} variables -> {out_path}")


def main(argv=None) -> None:
    try:
        cli.main(args=argv, prog_name="reljoint", standalone_mode=False)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except (
        TripleFileError,
        clue_mod.ClueFileError,
        cand.PredictionFileError,
        synth_mod.SynthConfigError,
        ilp.ModelError,
        ValueError,
        OSError,
    ) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
