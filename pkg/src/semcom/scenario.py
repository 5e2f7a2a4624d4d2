"""Scenario worlds: events, task chains, hidden semantics and transitions.

Event ids are grouped by kind: initial events first, then every task's
intermediary chain as one contiguous block, then final events. Task ``t``
owns initial event ``t`` and final event ``n_events - n_tasks + t``.
"""

from __future__ import annotations

import enum
import json
from bisect import bisect_right
from dataclasses import asdict, dataclass
from functools import cached_property
from math import comb
from pathlib import Path

import numpy as np

from .beliefs import BeliefSet, CostVector, MIN_TASK_LENGTH, normalize_costs
from .errors import (
    InconsistentConfig,
    NonAbsorbing,
    ScenarioFormatError,
    UnknownEvent,
    UnknownTask,
)

FORMAT_VERSION = "semcom-scenario/1"


class EventKind(str, enum.Enum):
    INITIAL = "initial"
    INTERMEDIARY = "intermediary"
    FINAL = "final"


@dataclass(frozen=True)
class ScenarioConfig:
    n_beliefs: int = 10
    n_events: int = 60
    n_tasks: int = 10
    cost_min: float = 1.0
    cost_max: float = 2.0
    gt_size_min: int = 2
    gt_size_max: int = 4
    length_min: int = MIN_TASK_LENGTH
    length_max: int = 6
    p_tilde_self_loop: float = 0.3
    p_tilde_reaches_final: bool = False

    def validate(self) -> None:
        """Raise InconsistentConfig naming the first violated inequality."""
        def need(cond, msg):
            if not cond:
                raise InconsistentConfig(msg)

        need(self.n_tasks >= 1, f"n_tasks >= 1 (got {self.n_tasks})")
        need(self.n_beliefs >= 1, f"n_beliefs >= 1 (got {self.n_beliefs})")
        need(
            MIN_TASK_LENGTH <= self.length_min <= self.length_max,
            f"{MIN_TASK_LENGTH} <= length_min <= length_max "
            f"(got {self.length_min}, {self.length_max})",
        )
        min_chain = self.length_max - 2
        need(
            self.n_events >= self.n_tasks * (2 + min_chain),
            f"n_events >= n_tasks * (2 + length_max - 2) = "
            f"{self.n_tasks * (2 + min_chain)} (got {self.n_events})",
        )
        need(
            1 <= self.gt_size_min <= self.gt_size_max <= self.n_beliefs,
            f"1 <= gt_size_min <= gt_size_max <= n_beliefs "
            f"(got {self.gt_size_min}, {self.gt_size_max}, {self.n_beliefs})",
        )
        need(
            0 < self.cost_min <= self.cost_max,
            f"0 < cost_min <= cost_max (got {self.cost_min}, {self.cost_max})",
        )
        need(
            0 <= self.p_tilde_self_loop < 1,
            f"0 <= p_tilde_self_loop < 1 (got {self.p_tilde_self_loop})",
        )


@dataclass(frozen=True)
class Event:
    id: int
    kind: EventKind
    owner_task: int
    position: int  # 0 for initial, 1..K along the chain, K+1 for final


@dataclass(frozen=True)
class TaskType:
    id: int
    initial_event: int
    final_event: int
    intermediary_chain: tuple[int, ...]
    length_bounds: tuple[int, int]

    @property
    def events(self) -> tuple[int, ...]:
        return (self.initial_event, *self.intermediary_chain, self.final_event)


@dataclass(frozen=True)
class TransitionModel:
    P: np.ndarray
    P_tilde: np.ndarray

    def __post_init__(self):
        for m in (self.P, self.P_tilde):
            m.setflags(write=False)


@dataclass(frozen=True)
class Scenario:
    beliefs: CostVector
    events: tuple[Event, ...]
    tasks: tuple[TaskType, ...]
    ground_truth: tuple[BeliefSet, ...]  # indexed by event id
    transitions: TransitionModel
    config: ScenarioConfig
    seed: int | None = None
    version: str = FORMAT_VERSION

    @property
    def n_beliefs(self) -> int:
        return len(self.beliefs)

    @property
    def n_events(self) -> int:
        return len(self.events)

    def event(self, e: int) -> Event:
        if not (isinstance(e, (int, np.integer)) and 0 <= e < len(self.events)):
            raise UnknownEvent(f"event {e} not in scenario with {len(self.events)} events")
        return self.events[e]

    def task(self, t: int) -> TaskType:
        if not (isinstance(t, (int, np.integer)) and 0 <= t < len(self.tasks)):
            raise UnknownTask(f"task {t} not in scenario with {len(self.tasks)} tasks")
        return self.tasks[t]

    @property
    def learnable_events(self) -> list[int]:
        """Events at which a description is transmitted (all but final)."""
        return [ev.id for ev in self.events if ev.kind is not EventKind.FINAL]

    # Sampling tables, built lazily: (targets, cumulative probabilities).
    @cached_property
    def _tables(self):
        out = []
        for M in (self.transitions.P, self.transitions.P_tilde):
            rows = []
            for row in M:
                idx = np.flatnonzero(row)
                rows.append((idx.tolist(), np.cumsum(row[idx]).tolist()))
            out.append(rows)
        return out

    def sample_next(self, e: int, perfect: bool, u: float) -> int:
        targets, cum = self._tables[0 if perfect else 1][e]
        i = bisect_right(cum, u * cum[-1])
        return targets[min(i, len(targets) - 1)]

    @cached_property
    def gt_masks(self) -> tuple[int, ...]:
        return tuple(s.mask for s in self.ground_truth)

    @cached_property
    def kinds(self) -> tuple[EventKind, ...]:
        return tuple(ev.kind for ev in self.events)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "seed": self.seed,
            "config": asdict(self.config),
            "beliefs": {"raw": list(self.beliefs.raw)},
            "events": [
                {"id": ev.id, "kind": ev.kind.value, "owner": ev.owner_task, "position": ev.position}
                for ev in self.events
            ],
            "tasks": [
                {
                    "id": t.id,
                    "initial": t.initial_event,
                    "final": t.final_event,
                    "chain": list(t.intermediary_chain),
                    "length_bounds": list(t.length_bounds),
                }
                for t in self.tasks
            ],
            "ground_truth": [list(s.members()) for s in self.ground_truth],
            "P": self.transitions.P.tolist(),
            "P_tilde": self.transitions.P_tilde.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        try:
            if d["version"] != FORMAT_VERSION:
                raise ScenarioFormatError(f"unsupported scenario version {d['version']!r}")
            config = ScenarioConfig(**d["config"])
            beliefs = normalize_costs(d["beliefs"]["raw"])
            B = len(beliefs)
            events = tuple(
                Event(e["id"], EventKind(e["kind"]), e["owner"], e["position"]) for e in d["events"]
            )
            tasks = tuple(
                TaskType(t["id"], t["initial"], t["final"], tuple(t["chain"]), tuple(t["length_bounds"]))
                for t in d["tasks"]
            )
            gt = tuple(BeliefSet.of(m, B) for m in d["ground_truth"])
            P = np.array(d["P"], dtype=float)
            Pt = np.array(d["P_tilde"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioFormatError):
                raise
            raise ScenarioFormatError(f"malformed scenario document: {exc}") from exc
        n = len(events)
        if P.shape != (n, n) or Pt.shape != (n, n) or len(gt) != n:
            raise ScenarioFormatError("matrix or ground-truth shape does not match event count")
        if any(ev.id != i for i, ev in enumerate(events)):
            raise ScenarioFormatError("event ids must be 0..n-1 in order")
        return cls(beliefs, events, tasks, gt, TransitionModel(P, Pt), config, d.get("seed"))

    def dumps(self) -> str:
        d = self.to_dict()
        rows = {}
        for key in ("P", "P_tilde"):
            placeholders = []
            for i, row in enumerate(d[key]):
                tag = f"@@{key}:{i}@@"
                rows[tag] = json.dumps(row)
                placeholders.append(tag)
            d[key] = placeholders
        text = json.dumps(d, indent=2)
        # one matrix row per line keeps the file readable
        for tag, row in rows.items():
            text = text.replace(f'"{tag}"', row, 1)
        return text + "\n"

    @classmethod
    def loads(cls, text: str) -> Scenario:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"scenario is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> Scenario:
        return cls.loads(Path(path).read_text())


def _exit_probabilities(n_chain: int, length_min: int, length_max: int) -> list[float]:
    """Per chain position i (1-based), probability of jumping to the final event.

    The hazards make the realised length uniform on [length_min, length_max]:
    leaving from position i gives length i + 2.
    """
    q = []
    for i in range(1, n_chain + 1):
        length = i + 2
        if length < length_min:
            q.append(0.0)
        elif length >= length_max or i == n_chain:
            q.append(1.0)
        else:
            q.append(1.0 / (length_max - length + 1))
    return q


def generate_scenario(config: ScenarioConfig, seed: int) -> Scenario:
    config.validate()
    rng = np.random.default_rng(seed)
    B, E, T = config.n_beliefs, config.n_events, config.n_tasks

    raw = rng.uniform(config.cost_min, config.cost_max, size=B)
    beliefs = normalize_costs(raw.tolist())

    n_int = E - 2 * T
    chain_sizes = [n_int // T + (1 if t < n_int % T else 0) for t in range(T)]

    events: list[Event] = [None] * E  # type: ignore[list-item]
    tasks = []
    nxt = T
    for t in range(T):
        chain = tuple(range(nxt, nxt + chain_sizes[t]))
        nxt += chain_sizes[t]
        init, final = t, E - T + t
        events[init] = Event(init, EventKind.INITIAL, t, 0)
        for pos, e in enumerate(chain, start=1):
            events[e] = Event(e, EventKind.INTERMEDIARY, t, pos)
        events[final] = Event(final, EventKind.FINAL, t, len(chain) + 1)
        tasks.append(TaskType(t, init, final, chain, (config.length_min, config.length_max)))

    gt = []
    for _ in range(E):
        size = int(rng.integers(config.gt_size_min, config.gt_size_max + 1))
        members = rng.choice(B, size=size, replace=False)
        gt.append(BeliefSet.of(sorted(int(b) for b in members), B))

    P = np.zeros((E, E))
    Pt = np.zeros((E, E))
    floor = config.p_tilde_self_loop
    for task in tasks:
        chain = task.intermediary_chain
        q = _exit_probabilities(len(chain), config.length_min, config.length_max)
        P[task.initial_event, chain[0]] = 1.0
        for i, e in enumerate(chain):
            P[e, task.final_event] = q[i]
            if q[i] < 1.0:
                P[e, chain[i + 1]] = 1.0 - q[i]
        P[task.final_event, task.final_event] = 1.0
        Pt[task.final_event, task.final_event] = 1.0

        # Imperfect regime: stall, fall back, or creep at most one position.
        order = (task.initial_event, *chain)
        for pos, e in enumerate(order):
            support = list(order[: min(pos + 2, len(order))])
            if config.p_tilde_reaches_final and pos >= 1:
                support.append(task.final_event)
            w = 1.0 - rng.random(len(support))  # in (0, 1], never zero
            w = (1.0 - floor) * w / w.sum()
            for j, target in enumerate(support):
                Pt[e, target] += w[j]
            Pt[e, e] += floor

    return Scenario(beliefs, tuple(events), tuple(tasks), tuple(gt), TransitionModel(P, Pt), config, seed)


def expected_perfect_length(scenario: Scenario, task: int) -> float:
    """Exact mean episode length (events observed, final included) when every
    description is perfect, from the fundamental matrix of the absorbing chain."""
    tk = scenario.task(task)
    states = list(tk.events)
    P = scenario.transitions.P[np.ix_(states, states)]
    final = len(states) - 1

    reach = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in np.flatnonzero(P[i]):
            if j not in reach:
                reach.add(int(j))
                frontier.append(int(j))
    if final not in reach:
        raise NonAbsorbing(f"final event of task {task} unreachable under P")
    transient = sorted(reach - {final})
    # every transient state must still be able to reach the final event
    can_finish = {final}
    changed = True
    while changed:
        changed = False
        for i in transient:
            if i not in can_finish and any(P[i, j] > 0 for j in can_finish):
                can_finish.add(i)
                changed = True
    if not set(transient) <= can_finish:
        raise NonAbsorbing(f"task {task} has a closed class that never reaches its final event")

    Q = P[np.ix_(transient, transient)]
    steps = np.linalg.solve(np.eye(len(transient)) - Q, np.ones(len(transient)))
    return float(steps[transient.index(0)]) + 1.0


def mean_perfect_length(scenario: Scenario) -> float:
    """Task-averaged expected length; tasks are drawn uniformly per episode."""
    return float(np.mean([expected_perfect_length(scenario, t.id) for t in scenario.tasks]))


def count_subsets(B: int, max_size: int) -> int:
    return sum(comb(B, k) for k in range(1, max_size + 1))
