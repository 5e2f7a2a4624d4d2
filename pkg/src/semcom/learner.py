"""Tabular Q-learning, the top-down pruning curriculum, and both baselines.

The speaker's state is the observed event. In the curriculum an action is a
set of beliefs to *remove* from the comprehensive set; in the flat baseline
an action is the transmitted description itself.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, fields
from math import comb
from typing import Callable, Mapping, Sequence

import numpy as np

from .beliefs import BeliefSet, CostVector, description_cost, subsets_of_cardinality
from .dynamics import DEFAULT_N_MAX, EndReason, begin_episode, step
from .errors import (
    ActionNotSubset,
    ActionSpaceTooLarge,
    CardinalityMismatch,
    DegenerateBeliefSet,
    EmptyResult,
    RangeViolation,
    UnknownStateAction,
    UnvisitedEvent,
)
from .metrics import MetricRecord
from .scenario import EventKind, Scenario

log = logging.getLogger(__name__)

MAX_FLAT_ACTIONS = 1 << 20


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 0.1
    # "visits": step size max(learning_rate, 1/n(s, a)); "constant": learning_rate
    lr_schedule: str = "visits"
    discount: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.6
    episodes_per_cl_step: int = 20_000
    prune_gap: float = 2.0
    min_visits: int = 50
    min_action_visits: int = 1
    # solve the Bellman fixed point on the recorded transitions after each phase
    replay: bool = True
    # keep an empty "prune nothing" action in every curriculum catalog
    probe: bool = True
    R_task: float = 10.0
    C_delay: float = 5.0
    alpha: float = 0.5
    delta: float = 0.5

    def __post_init__(self):
        checks = {
            "learning_rate": 0 < self.learning_rate <= 1,
            "lr_schedule": self.lr_schedule in ("visits", "constant"),
            "discount": 0 <= self.discount < 1,
            "epsilon_start": 0 <= self.epsilon_start <= 1,
            "epsilon_end": 0 <= self.epsilon_end <= 1,
            "epsilon_decay_fraction": 0 < self.epsilon_decay_fraction <= 1,
            "episodes_per_cl_step": self.episodes_per_cl_step >= 1,
            "prune_gap": self.prune_gap >= 0,
            "min_visits": self.min_visits >= 0,
            "min_action_visits": self.min_action_visits >= 0,
            "R_task": self.R_task > 0,
            "C_delay": self.C_delay > 0,
            "alpha": 0 <= self.alpha <= 1,
            "delta": 0 <= self.delta <= 1,
        }
        for name, ok in checks.items():
            if not ok:
                raise RangeViolation(name, f"{getattr(self, name)!r} out of range")

    def epsilon(self, k: int, n: int) -> float:
        """Linear decay over the first ``epsilon_decay_fraction`` of ``n`` episodes."""
        span = max(self.epsilon_decay_fraction * n, 1.0)
        frac = min(k / span, 1.0)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


class QTable:
    """Q-values and visit counts keyed by event, one array per event catalog."""

    def __init__(self, catalog: Mapping[int, Sequence[BeliefSet]]):
        self.action_catalog = {e: list(acts) for e, acts in catalog.items()}
        self.values = {e: np.zeros(len(a)) for e, a in self.action_catalog.items()}
        self.visits = {e: np.zeros(len(a), dtype=np.int64) for e, a in self.action_catalog.items()}
        self.state_visits = {e: 0 for e in self.action_catalog}
        # (state, action) -> [reward sum, {next state or None: count}]
        self.experience: dict[tuple[int, int], list] = {}

    def record(self, state: int, action: int, reward: float, next_state: int | None) -> None:
        entry = self.experience.get((state, action))
        if entry is None:
            entry = self.experience[(state, action)] = [0.0, {}]
        entry[0] += reward
        entry[1][next_state] = entry[1].get(next_state, 0) + 1

    def get(self, state: int, action: int) -> float:
        self._check(state, action)
        return float(self.values[state][action])

    def greedy(self, state: int) -> int:
        return int(np.argmax(self.values[state]))

    def state_value(self, state: int) -> float:
        v = self.values.get(state)
        return float(v.max()) if v is not None and len(v) else 0.0

    def _check(self, state: int, action: int) -> None:
        acts = self.values.get(state)
        if acts is None or not 0 <= action < len(acts):
            raise UnknownStateAction(f"({state}, {action}) not in the action catalog")


def reward(slot_cost: float, next_event_kind: EventKind, slot_index: int, hyper: Hyperparams) -> float:
    """Immediate reward: completion bonus, delay penalty for returning to an
    initial event, otherwise just the transmission cost."""
    if next_event_kind is EventKind.FINAL:
        return -slot_cost + hyper.R_task
    if next_event_kind is EventKind.INITIAL and slot_index >= 1:
        return -slot_cost - hyper.C_delay
    return -slot_cost


def q_update(
    q: QTable,
    state: int,
    action: int,
    reward: float,
    next_state: int | None,
    hyper: Hyperparams,
    terminal: bool = False,
) -> QTable:
    q._check(state, action)
    q.visits[state][action] += 1
    if hyper.lr_schedule == "visits":
        eta = max(hyper.learning_rate, 1.0 / q.visits[state][action])
    else:
        eta = hyper.learning_rate
    future = 0.0 if terminal or next_state is None else q.state_value(next_state)
    row = q.values[state]
    row[action] = (1.0 - eta) * row[action] + eta * (reward + hyper.discount * future)
    return q


def replay(q: QTable, hyper: Hyperparams, tol: float = 1e-10, max_iter: int = 100_000) -> QTable:
    """Replay all recorded experience to convergence.

    Equivalent to sweeping the transition log with sample-average step sizes
    until nothing changes: every visited pair gets its empirical mean reward
    plus the discounted value of its empirical next-state distribution.
    Online estimates lag behind the bootstrap targets they were built from;
    this removes that lag before the values are compared.
    """
    keys = sorted(q.experience)
    if not keys:
        return q
    states = sorted(q.values)
    col = {s: i for i, s in enumerate(states)}
    n = len(keys)
    rbar = np.empty(n)
    T = np.zeros((n, len(states)))
    owner = np.empty(n, dtype=np.int64)
    for i, (s, a) in enumerate(keys):
        rsum, nxt = q.experience[(s, a)]
        total = sum(nxt.values())
        rbar[i] = rsum / total
        owner[i] = col[s]
        for ns, c in nxt.items():
            if ns is not None and ns in col:
                T[i, col[ns]] += c / total
    V = np.zeros(len(states))
    for _ in range(max_iter):
        Q = rbar + hyper.discount * (T @ V)
        V_new = np.full(len(states), -np.inf)
        np.maximum.at(V_new, owner, Q)
        V_new[np.isinf(V_new)] = 0.0
        if np.max(np.abs(V_new - V)) < tol:
            V = V_new
            break
        V = V_new
    Q = rbar + hyper.discount * (T @ V)
    for i, (s, a) in enumerate(keys):
        q.values[s][a] = Q[i]
    return q


# -- action spaces ------------------------------------------------------------

def action_space_step1(B_comp: BeliefSet) -> list[BeliefSet]:
    if B_comp.cardinality() < 2:
        raise DegenerateBeliefSet(f"need at least two beliefs to prune, got {B_comp}")
    return subsets_of_cardinality(B_comp, 1)


def action_space_step_l(
    prune_1: Sequence[BeliefSet], prune_lm1: Sequence[BeliefSet], l: int
) -> list[BeliefSet]:
    """Candidates of size ``l``: one first-step singleton joined to one
    disjoint member of the previous step's pruning set."""
    if l < 2:
        raise CardinalityMismatch(f"step l must be >= 2, got {l}")
    if any(s.cardinality() != 1 for s in prune_1):
        raise CardinalityMismatch("first-step pruning entries must be singletons")
    if any(s.cardinality() != l - 1 for s in prune_lm1):
        raise CardinalityMismatch(f"previous-step pruning entries must have {l - 1} beliefs")
    out = {}
    for b in prune_1:
        for s in prune_lm1:
            if b.mask & s.mask:
                continue
            u = b | s
            out[u.mask] = u
    return [out[m] for m in sorted(out)]


def description_from_action(B_comp: BeliefSet, action: BeliefSet) -> BeliefSet:
    if not action.issubset(B_comp):
        raise ActionNotSubset(f"action {action} is not inside {B_comp}")
    desc = B_comp - action
    if not desc:
        raise EmptyResult(f"removing {action} from {B_comp} leaves nothing to transmit")
    return desc


def extract_pruned_set(q: QTable, event: int, hyper: Hyperparams) -> list[BeliefSet]:
    """Non-empty actions whose Q-value is within ``prune_gap`` of the best visited one."""
    if q.state_visits.get(event, 0) < max(hyper.min_visits, 1):
        warnings.warn(
            f"event {event} visited {q.state_visits.get(event, 0)} times "
            f"(< {hyper.min_visits}); no pruning extracted",
            UnvisitedEvent,
            stacklevel=2,
        )
        return []
    vals = q.values[event]
    seen = q.visits[event] >= hyper.min_action_visits
    if not seen.any():
        return []
    best = vals[seen].max()
    return [
        a for a, v, ok in zip(q.action_catalog[event], vals, seen)
        if ok and a and best - v <= hyper.prune_gap
    ]


def select_optimal_description(
    B_comp: BeliefSet, prune_lm1: Sequence[BeliefSet], costs: CostVector, alpha: float
) -> BeliefSet:
    """Remove the single previous-step pruning candidate that saves the most."""
    best, best_saving = None, -np.inf
    for s in sorted(prune_lm1):
        saving = alpha * costs.total(s) + (1.0 - alpha) * s.cardinality()
        if saving > best_saving:
            best, best_saving = s, saving
    return B_comp if best is None else B_comp - best


def flat_action_catalog(B: int) -> list[BeliefSet]:
    """Every description allowed by the cardinality constraint, by mask."""
    size = sum(comb(B, k) for k in range(1, B // 2 + 1))
    if size > MAX_FLAT_ACTIONS:
        raise ActionSpaceTooLarge(
            f"flat RL over {B} beliefs needs {size} actions (> {MAX_FLAT_ACTIONS}); "
            "use the curriculum method or fewer beliefs"
        )
    half = B // 2
    return [BeliefSet(m, B) for m in range(1, 1 << B) if bin(m).count("1") <= half]


# -- episode loop -------------------------------------------------------------

@dataclass
class _Policy:
    """Per-event transmitted descriptions and their slot costs, one entry per
    action; ``q`` is None when the policy is frozen (no learning)."""

    descs: dict[int, list[BeliefSet]]
    costs: dict[int, list[float]]
    q: QTable | None = None
    learn: set[int] = field(default_factory=set)  # events that explore


def _play(
    scenario: Scenario,
    policy: _Policy,
    hyper: Hyperparams,
    rng: np.random.Generator,
    n_episodes: int,
    *,
    method: str,
    seed: int,
    cl_step: int = 0,
    first_episode: int = 0,
    n_max: int = DEFAULT_N_MAX,
    explore: bool = True,
) -> list[MetricRecord]:
    records = []
    q = policy.q
    kinds = scenario.kinds
    for k in range(n_episodes):
        eps = hyper.epsilon(k, n_episodes) if explore else 0.0
        st = begin_episode(scenario, rng, first_episode + k, n_max)
        cost_sum = reward_sum = 0.0
        while True:
            e = st.current_event
            acts = policy.descs[e]
            if len(acts) == 1:
                a = 0
            elif e in policy.learn and rng.random() < eps:
                a = int(rng.random() * len(acts))
            else:
                a = q.greedy(e) if q is not None else 0
            slot_index = st.slot_index
            out = step(st, acts[a], scenario, rng)
            c = policy.costs[e][a]
            r = reward(c, kinds[out.next_event], slot_index, hyper)
            cost_sum += c
            reward_sum += r
            if q is not None:
                terminal = out.ended_by is EndReason.COMPLETED
                q.state_visits[e] += 1
                q_update(q, e, a, r, out.next_event, hyper, terminal=terminal)
                if hyper.replay:
                    q.record(e, a, r, None if terminal else out.next_event)
            if out.episode_ended:
                break
        records.append(MetricRecord(
            method=method, seed=seed, episode=first_episode + k, task=st.current_task,
            cl_step=cl_step, length=st.events_observed,
            completed=out.ended_by is EndReason.COMPLETED,
            restarts=st.restarts_this_episode, cost=cost_sum, reward=reward_sum,
        ))
    return records


def _frozen_policy(scenario: Scenario, descriptions: Mapping[int, BeliefSet], alpha: float) -> _Policy:
    costs = scenario.beliefs
    descs = {e: [descriptions[e]] for e in scenario.learnable_events}
    return _Policy(descs, {e: [description_cost(d[0], costs, alpha)] for e, d in descs.items()})


def evaluate(
    scenario: Scenario,
    descriptions: Mapping[int, BeliefSet],
    hyper: Hyperparams,
    episodes: int,
    seed: int,
    *,
    method: str = "eval",
    n_max: int = DEFAULT_N_MAX,
    cl_step: int = 0,
) -> list[MetricRecord]:
    """Roll out a fixed description per event, no learning, no exploration."""
    rng = np.random.default_rng([seed, 1])
    policy = _frozen_policy(scenario, descriptions, hyper.alpha)
    return _play(scenario, policy, hyper, rng, episodes, method=method, seed=seed,
                 cl_step=cl_step, n_max=n_max, explore=False)


# -- curriculum ---------------------------------------------------------------

@dataclass
class CurriculumState:
    B_comp: BeliefSet
    prune_sets: dict[tuple[int, int], list[BeliefSet]] = field(default_factory=dict)
    finished: dict[int, bool] = field(default_factory=dict)
    B_opt: dict[int, BeliefSet] = field(default_factory=dict)
    finished_at: dict[int, int] = field(default_factory=dict)
    current_step: int = 0


class CurriculumLearner:
    """Top-down pruning curriculum driven by per-step Q-learning.

    Step ``l`` searches, per event, for size-``l`` belief subsets that can be
    dropped from the comprehensive set without losing a perfect description.
    An event whose step-``l`` pruning set comes back empty is finished and
    keeps transmitting its optimal description for the rest of the run.
    """

    def __init__(self, scenario: Scenario, hyper: Hyperparams, seed: int,
                 n_max: int = DEFAULT_N_MAX, progress: Callable[[str], None] | None = None):
        self.scenario = scenario
        self.hyper = hyper
        self.seed = seed
        self.n_max = n_max
        self.rng = np.random.default_rng(seed)
        self.progress = progress
        B_comp = BeliefSet.full(scenario.n_beliefs)
        self.state = CurriculumState(B_comp, finished={e: False for e in scenario.learnable_events})
        self.records: list[MetricRecord] = []
        self.q: QTable | None = None

    def _finish(self, e: int, l: int) -> None:
        st = self.state
        prev = st.prune_sets.get((e, l - 1), [])
        st.B_opt[e] = select_optimal_description(st.B_comp, prev, self.scenario.beliefs, self.hyper.alpha)
        st.finished[e] = True
        st.finished_at[e] = l

    def _catalog(self, e: int, l: int) -> list[BeliefSet]:
        st = self.state
        if l == 1:
            acts = action_space_step1(st.B_comp)
        else:
            acts = action_space_step_l(st.prune_sets[(e, 1)], st.prune_sets[(e, l - 1)], l)
        return [a for a in acts if a != st.B_comp]

    def run_step(self, l: int) -> None:
        st, sc, hyper = self.state, self.scenario, self.hyper
        st.current_step = l
        catalogs = {}
        for e in sc.learnable_events:
            if st.finished[e]:
                continue
            acts = self._catalog(e, l)
            if acts:
                # The probe transmits the full set, so it is always perfect and
                # anchors the gap test when every real candidate is imperfect.
                catalogs[e] = [BeliefSet.empty(sc.n_beliefs)] + acts if hyper.probe else acts
            else:
                st.prune_sets[(e, l)] = []
                self._finish(e, l)
        if not catalogs:
            return

        descs, costs = {}, {}
        for e in sc.learnable_events:
            if e in catalogs:
                descs[e] = [description_from_action(st.B_comp, a) for a in catalogs[e]]
            else:
                descs[e] = [st.B_opt[e]]
            costs[e] = [description_cost(d, sc.beliefs, hyper.alpha) for d in descs[e]]
        # Finished events keep a one-action row so their value can be bootstrapped.
        table = {
            e: catalogs[e] if e in catalogs else [st.B_comp - st.B_opt[e]]
            for e in sc.learnable_events
        }
        q = QTable(table)
        policy = _Policy(descs, costs, q, learn=set(catalogs))
        n = hyper.episodes_per_cl_step
        self.records.extend(_play(
            sc, policy, hyper, self.rng, n, method="cl", seed=self.seed, cl_step=l,
            first_episode=len(self.records), n_max=self.n_max,
        ))
        if hyper.replay:
            replay(q, hyper)
        self.q = q

        for e in catalogs:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UnvisitedEvent)
                pruned = extract_pruned_set(q, e, hyper)
            if q.state_visits[e] < max(hyper.min_visits, 1):
                log.warning("event %d under-visited at step %d (%d visits)", e, l, q.state_visits[e])
            st.prune_sets[(e, l)] = pruned
            if not pruned:
                self._finish(e, l)
        if self.progress:
            left = sum(not f for f in st.finished.values())
            self.progress(f"cl step {l}: trained {len(catalogs)} events, {left} unfinished")

    def run(self) -> tuple[dict[int, BeliefSet], list[MetricRecord]]:
        st = self.state
        B = self.scenario.n_beliefs
        last = 0
        for l in range(1, B):
            last = l
            self.run_step(l)
            if all(st.finished.values()):
                break
        # pruning still possible after the last step: take its best candidate
        for e, done in st.finished.items():
            if not done:
                self._finish(e, last + 1)
        return dict(st.B_opt), self.records


def run_cl(scenario: Scenario, hyper: Hyperparams, seed: int, n_max: int = DEFAULT_N_MAX,
           progress: Callable[[str], None] | None = None) -> tuple[dict[int, BeliefSet], list[MetricRecord]]:
    return CurriculumLearner(scenario, hyper, seed, n_max, progress).run()


# -- baselines ----------------------------------------------------------------

def train_flat_rl(scenario: Scenario, hyper: Hyperparams, seed: int, episodes: int,
                  n_max: int = DEFAULT_N_MAX) -> tuple[QTable, list[MetricRecord]]:
    catalog = flat_action_catalog(scenario.n_beliefs)
    costs = [description_cost(d, scenario.beliefs, hyper.alpha) for d in catalog]
    events = scenario.learnable_events
    q = QTable({e: catalog for e in events})
    policy = _Policy({e: catalog for e in events}, {e: costs for e in events}, q, learn=set(events))
    rng = np.random.default_rng(seed)
    records = _play(scenario, policy, hyper, rng, episodes, method="flat-rl", seed=seed, n_max=n_max)
    if hyper.replay:
        replay(q, hyper)
    return q, records


def run_flat_rl(scenario: Scenario, hyper: Hyperparams, seed: int, episodes: int,
                n_max: int = DEFAULT_N_MAX) -> tuple[dict[int, BeliefSet], list[MetricRecord]]:
    """Single-phase Q-learning over whole descriptions; returns the greedy policy."""
    q, records = train_flat_rl(scenario, hyper, seed, episodes, n_max)
    policy = {e: q.action_catalog[e][q.greedy(e)] for e in q.action_catalog}
    return policy, records


def run_non_semantic(scenario: Scenario, hyper: Hyperparams, episodes: int, seed: int,
                     n_max: int = DEFAULT_N_MAX) -> list[MetricRecord]:
    full = BeliefSet.full(scenario.n_beliefs)
    policy = _frozen_policy(scenario, {e: full for e in scenario.learnable_events}, hyper.alpha)
    rng = np.random.default_rng(seed)
    return _play(scenario, policy, hyper, rng, episodes, method="non-semantic", seed=seed,
                 n_max=n_max, explore=False)
