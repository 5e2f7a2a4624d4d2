"""Episode lifecycle and state evolution under perfect/imperfect descriptions."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .beliefs import BeliefSet
from .errors import EmptyDescription, EpisodeNotActive
from .scenario import EventKind, Scenario

DEFAULT_N_MAX = 200


class EndReason(str, enum.Enum):
    COMPLETED = "completed"
    RESTARTED = "restarted"
    CAPPED = "capped"


@dataclass
class WorldState:
    episode_index: int
    slot_index: int
    current_event: int
    current_task: int
    restarts_this_episode: int = 0
    slots_elapsed: int = 0
    n_max: int = DEFAULT_N_MAX
    active: bool = True

    @property
    def events_observed(self) -> int:
        return self.slots_elapsed + 1


@dataclass(frozen=True)
class StepOutcome:
    next_event: int
    listener_event: int
    episode_ended: bool
    ended_by: EndReason | None
    perfect: bool
    restarted: bool = False


def is_perfect(desc: BeliefSet, event: int, scenario: Scenario) -> bool:
    scenario.event(event)
    return desc.mask & scenario.gt_masks[event] == scenario.gt_masks[event]


def listener_reconstruct(
    desc: BeliefSet, speaker_event: int, scenario: Scenario, rng: np.random.Generator
) -> int:
    """Event the listener acts on: the true one iff the description is perfect,
    otherwise uniform over every other event."""
    if is_perfect(desc, speaker_event, scenario):
        return speaker_event
    n = scenario.n_events
    j = min(int(rng.random() * (n - 1)), n - 2)
    return j + 1 if j >= speaker_event else j


def begin_episode(
    scenario: Scenario, rng: np.random.Generator, episode_index: int = 0, n_max: int = DEFAULT_N_MAX
) -> WorldState:
    task = scenario.tasks[int(rng.integers(len(scenario.tasks)))]
    return WorldState(
        episode_index=episode_index,
        slot_index=1,
        current_event=task.initial_event,
        current_task=task.id,
        n_max=n_max,
    )


def step(
    state: WorldState, desc: BeliefSet, scenario: Scenario, rng: np.random.Generator
) -> StepOutcome:
    """Advance one slot in place and report what happened.

    A move back to an initial event counts as a restart but the episode
    carries on from there; the episode ends on a final event or when the
    number of observed events reaches ``state.n_max``.
    """
    if not state.active:
        raise EpisodeNotActive(f"episode {state.episode_index} already ended")
    if not desc:
        raise EmptyDescription("cannot transmit an empty description")
    e = state.current_event
    perfect = is_perfect(desc, e, scenario)
    listener = listener_reconstruct(desc, e, scenario, rng)
    nxt = scenario.sample_next(e, perfect, rng.random())

    state.slots_elapsed += 1
    state.slot_index += 1
    state.current_event = nxt
    kind = scenario.kinds[nxt]
    restarted = kind is EventKind.INITIAL
    if restarted:
        state.restarts_this_episode += 1

    ended_by = None
    if kind is EventKind.FINAL:
        ended_by = EndReason.COMPLETED
    elif state.events_observed >= state.n_max:
        ended_by = EndReason.CAPPED
    if ended_by is not None:
        state.active = False
    return StepOutcome(nxt, listener, ended_by is not None, ended_by, perfect, restarted)
