"""Per-episode metric records, CSV I/O, windowing and method comparison."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .beliefs import objective_contribution
from .errors import EmptySeries, HarnessError, SeedMismatch

CSV_COLUMNS = (
    "method", "seed", "episode", "task", "cl_step",
    "length", "completed", "restarts", "cost", "reward",
)


@dataclass(frozen=True)
class MetricRecord:
    method: str
    seed: int
    episode: int
    task: int
    cl_step: int
    length: int
    completed: bool
    restarts: int
    cost: float
    reward: float

    @property
    def capped(self) -> bool:
        return not self.completed

    def objective(self, delta: float) -> float:
        return objective_contribution(self.cost, self.length, delta, self.completed)

    def to_row(self) -> list[str]:
        return [
            self.method, str(self.seed), str(self.episode), str(self.task), str(self.cl_step),
            str(self.length), "1" if self.completed else "0", str(self.restarts),
            repr(self.cost), repr(self.reward),
        ]

    @classmethod
    def from_row(cls, row: dict) -> MetricRecord:
        return cls(
            method=row["method"], seed=int(row["seed"]), episode=int(row["episode"]),
            task=int(row["task"]), cl_step=int(row["cl_step"]), length=int(row["length"]),
            completed=row["completed"] == "1", restarts=int(row["restarts"]),
            cost=float(row["cost"]), reward=float(row["reward"]),
        )


assert tuple(f.name for f in fields(MetricRecord)) == CSV_COLUMNS


def write_csv(records: Iterable[MetricRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.to_row())


def read_csv(path) -> list[MetricRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise HarnessError(f"{path}: unexpected header {reader.fieldnames}")
        return [MetricRecord.from_row(row) for row in reader]


def window_average(records: Sequence[MetricRecord], window: int) -> dict[str, np.ndarray]:
    """Trailing-window means of episode length and cost, one value per record.

    The first ``window - 1`` values average over all records seen so far.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if not records:
        raise EmptySeries("no records to average")
    out = {}
    for key in ("length", "cost"):
        x = np.array([getattr(r, key) for r in records], dtype=float)
        c = np.concatenate([[0.0], np.cumsum(x)])
        idx = np.arange(1, len(x) + 1)
        lo = np.maximum(idx - window, 0)
        out[key] = (c[idx] - c[lo]) / (idx - lo)
    return out


@dataclass
class MethodSummary:
    """Aggregate statistics of one method over one seed."""

    method: str
    seed: int
    episodes: int
    train_mean_length: float
    train_mean_cost: float
    capped: int
    final_window_length: float
    final_window_cost: float
    converged_length: float
    converged_cost: float
    converged_episodes: int
    objective_total: float
    objective_mean: float

    to_dict = asdict


def summarize(
    method: str,
    seed: int,
    train: Sequence[MetricRecord],
    evaluation: Sequence[MetricRecord],
    window: int,
    delta: float,
) -> MethodSummary:
    """Training statistics include capped episodes; converged ones exclude them."""
    if not train:
        raise EmptySeries(f"{method} seed {seed}: no training records")
    lengths = np.array([r.length for r in train], dtype=float)
    costs = np.array([r.cost for r in train], dtype=float)
    tail = [r for r in train[-window:] if r.completed]
    done = [r for r in evaluation if r.completed] or tail
    objective_total = float(sum(r.objective(delta) for r in train))
    return MethodSummary(
        method=method,
        seed=seed,
        episodes=len(train),
        train_mean_length=float(lengths.mean()),
        train_mean_cost=float(costs.mean()),
        capped=sum(1 for r in train if not r.completed),
        final_window_length=float(np.mean([r.length for r in tail])) if tail else float("nan"),
        final_window_cost=float(np.mean([r.cost for r in tail])) if tail else float("nan"),
        converged_length=float(np.mean([r.length for r in done])) if done else float("nan"),
        converged_cost=float(np.mean([r.cost for r in done])) if done else float("nan"),
        converged_episodes=len(done),
        objective_total=objective_total,
        objective_mean=objective_total / len(train),
    )


@dataclass
class RunSummary:
    per_method: dict[str, list[MethodSummary]]
    ratios: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "per_method": {m: [s.to_dict() for s in ss] for m, ss in self.per_method.items()},
            "ratios": self.ratios,
        }


def _mean(summaries: list[MethodSummary], key: str) -> float:
    return float(np.mean([getattr(s, key) for s in summaries]))


def compare_methods(summaries: Iterable[MethodSummary]) -> RunSummary:
    """Ratio table over the seeds shared by every method present.

    ``flat_rl_over_cl_length`` / ``flat_rl_over_cl_cost`` use training means;
    ``non_semantic_over_cl_cost`` / ``..._length`` use converged values.
    """
    per_method: dict[str, list[MethodSummary]] = {}
    for s in summaries:
        per_method.setdefault(s.method, []).append(s)
    if len(per_method) < 2:
        raise HarnessError(f"need at least two methods to compare, got {sorted(per_method)}")
    seed_sets = {m: {s.seed for s in ss} for m, ss in per_method.items()}
    common = set.intersection(*seed_sets.values())
    if not common:
        raise SeedMismatch(f"methods share no seeds: {seed_sets}")
    per_method = {
        m: sorted((s for s in ss if s.seed in common), key=lambda s: s.seed)
        for m, ss in sorted(per_method.items())
    }

    ratios: dict[str, float] = {}
    cl = per_method.get("cl")
    if cl is not None and "flat-rl" in per_method:
        flat = per_method["flat-rl"]
        ratios["flat_rl_over_cl_length"] = _mean(flat, "train_mean_length") / _mean(cl, "train_mean_length")
        ratios["flat_rl_over_cl_cost"] = _mean(flat, "train_mean_cost") / _mean(cl, "train_mean_cost")
    if cl is not None and "non-semantic" in per_method:
        ns = per_method["non-semantic"]
        ratios["non_semantic_over_cl_cost"] = _mean(ns, "converged_cost") / _mean(cl, "converged_cost")
        ratios["non_semantic_over_cl_length"] = _mean(ns, "converged_length") / _mean(cl, "converged_length")
    if not ratios:
        # two methods without cl: report the plain pairwise ratios
        a, b = list(per_method)[:2]
        ratios[f"{a}_over_{b}_length"] = _mean(per_method[a], "train_mean_length") / _mean(per_method[b], "train_mean_length")
        ratios[f"{a}_over_{b}_cost"] = _mean(per_method[a], "train_mean_cost") / _mean(per_method[b], "train_mean_cost")
    return RunSummary(per_method, ratios)


def method_summary_from_dict(d: dict) -> MethodSummary:
    return MethodSummary(**d)


def load_summaries(paths: Iterable[Path]) -> list[MethodSummary]:
    out = []
    for p in paths:
        d = json.loads(Path(p).read_text())
        out.extend(method_summary_from_dict(s) for s in d["seeds"])
    return out
