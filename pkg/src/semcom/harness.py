"""Run one configured method over every seed and write its artifacts.

Layout of ``out_dir`` after a run::

    config.toml                  effective config (all keys)
    scenario_seed<S>.json        generated world
    metrics_seed<S>.csv          one row per training episode
    descriptions_seed<S>.json    description per event after training
    summary.json                 per-seed MethodSummary records
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Callable

from .beliefs import BeliefSet
from .config import ExperimentConfig, dump_config
from .learner import evaluate, run_cl, run_flat_rl, run_non_semantic
from .metrics import MethodSummary, compare_methods, load_summaries, summarize, write_csv
from .scenario import generate_scenario

log = logging.getLogger(__name__)


def _descriptions_doc(descs: dict[int, BeliefSet]) -> dict:
    return {str(e): list(d.members()) for e, d in sorted(descs.items())}


def run_seed(cfg: ExperimentConfig, seed: int, out_dir: Path,
             progress: Callable[[str], None] | None = None) -> MethodSummary:
    method, run, hyper = cfg.run.method, cfg.run, cfg.learner
    scenario = generate_scenario(cfg.scenario, seed)
    scenario.save(out_dir / f"scenario_seed{seed}.json")

    if method == "cl":
        descs, records = run_cl(scenario, hyper, seed, run.n_max, progress)
    elif method == "flat-rl":
        descs, records = run_flat_rl(scenario, hyper, seed, run.episodes, run.n_max)
    else:
        full = BeliefSet.full(scenario.n_beliefs)
        descs = {e: full for e in scenario.learnable_events}
        records = run_non_semantic(scenario, hyper, run.episodes, seed, run.n_max)

    if method == "non-semantic":
        evaluation = records
    elif run.eval_episodes:
        evaluation = evaluate(scenario, descs, hyper, run.eval_episodes, seed,
                              method=method, n_max=run.n_max)
    else:
        evaluation = []

    write_csv(records, out_dir / f"metrics_seed{seed}.csv")
    (out_dir / f"descriptions_seed{seed}.json").write_text(
        json.dumps(_descriptions_doc(descs), indent=1) + "\n"
    )
    return summarize(method, seed, records, evaluation, run.window, hyper.delta)


def run_experiment(cfg: ExperimentConfig, out_dir, progress: Callable[[str], None] | None = None) -> int:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.toml").write_text(dump_config(cfg))
    summaries = []
    for seed in cfg.run.seeds:
        if progress:
            progress(f"{cfg.run.method}: seed {seed}")
        s = run_seed(cfg, seed, out_dir, progress)
        summaries.append(s)
        if progress:
            progress(
                f"{cfg.run.method}: seed {seed} done: train length {s.train_mean_length:.3f}, "
                f"train cost {s.train_mean_cost:.3f}, converged cost {s.converged_cost:.3f}"
            )
    doc = {"method": cfg.run.method, "seeds": [s.to_dict() for s in summaries]}
    (out_dir / "summary.json").write_text(json.dumps(doc, indent=2) + "\n")
    return 0


def compare_dirs(inputs, out_path) -> dict:
    summaries = load_summaries(Path(d) / "summary.json" for d in inputs)
    table = compare_methods(summaries).to_dict()
    Path(out_path).write_text(json.dumps(table, indent=2) + "\n")
    return table
