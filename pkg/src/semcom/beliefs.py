"""Beliefs, descriptions and their costs.

A description is a subset of the ``B`` shared beliefs, stored as an integer
bit mask. Everything in this module is a pure function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .errors import (
    CardinalityOutOfRange,
    EmptyCostVector,
    EmptyDescription,
    EmptyEpisode,
    LengthBelowMinimum,
    NonPositiveCost,
)

MIN_TASK_LENGTH = 3


@dataclass(frozen=True, order=True)
class BeliefSet:
    """Fixed-width set of belief indices backed by a bit mask.

    Ordering compares masks, which is the canonical order used for every
    enumeration and tie-break in the package.
    """

    mask: int
    width: int

    def __post_init__(self):
        if self.width < 0:
            raise ValueError(f"negative width {self.width}")
        if self.mask < 0 or self.mask >> self.width:
            raise ValueError(f"mask {self.mask:#x} does not fit in {self.width} beliefs")

    @classmethod
    def of(cls, members: Iterable[int], width: int) -> BeliefSet:
        mask = 0
        for b in members:
            if not 0 <= b < width:
                raise ValueError(f"belief {b} outside [0, {width})")
            mask |= 1 << b
        return cls(mask, width)

    @classmethod
    def full(cls, width: int) -> BeliefSet:
        return cls((1 << width) - 1, width)

    @classmethod
    def empty(cls, width: int) -> BeliefSet:
        return cls(0, width)

    def members(self) -> tuple[int, ...]:
        return tuple(b for b in range(self.width) if self.mask >> b & 1)

    def cardinality(self) -> int:
        return bin(self.mask).count("1")

    def __len__(self) -> int:
        return self.cardinality()

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __contains__(self, b: object) -> bool:
        return isinstance(b, int) and 0 <= b < self.width and bool(self.mask >> b & 1)

    def __bool__(self) -> bool:
        return self.mask != 0

    def _check(self, other: BeliefSet) -> None:
        if self.width != other.width:
            raise ValueError(f"width mismatch: {self.width} vs {other.width}")

    def __or__(self, other: BeliefSet) -> BeliefSet:
        self._check(other)
        return BeliefSet(self.mask | other.mask, self.width)

    def __and__(self, other: BeliefSet) -> BeliefSet:
        self._check(other)
        return BeliefSet(self.mask & other.mask, self.width)

    def __sub__(self, other: BeliefSet) -> BeliefSet:
        self._check(other)
        return BeliefSet(self.mask & ~other.mask, self.width)

    def issubset(self, other: BeliefSet) -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def issuperset(self, other: BeliefSet) -> bool:
        return other.issubset(self)

    def __repr__(self) -> str:
        return "{" + ",".join(f"b{b}" for b in self.members()) + "}"


@dataclass(frozen=True)
class CostVector:
    raw: tuple[float, ...]
    normalized: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.raw)

    def total(self, desc: BeliefSet) -> float:
        return sum(self.normalized[b] for b in desc.members())


@dataclass(frozen=True)
class CostParams:
    """Weights of the two trade-offs: ``alpha`` (belief cost vs. count) and
    ``delta`` (transmission cost vs. execution time)."""

    alpha: float = 0.5
    delta: float = 0.5

    def __post_init__(self):
        for name in ("alpha", "delta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


def normalize_costs(raw: Sequence[float]) -> CostVector:
    raw = tuple(float(c) for c in raw)
    if not raw:
        raise EmptyCostVector("belief cost vector is empty")
    bad = [c for c in raw if not c > 0]
    if bad:
        raise NonPositiveCost(f"belief costs must be > 0, got {bad}")
    top = max(raw)
    # x / x == 1.0 exactly in IEEE arithmetic, so the maximum maps to 1.
    return CostVector(raw, tuple(c / top for c in raw))


def description_cost(desc: BeliefSet, costs: CostVector, alpha: float) -> float:
    """Per-slot cost: ``alpha * sum(C_b) + (1 - alpha) * |desc|``."""
    if not desc:
        raise EmptyDescription("a description needs at least one belief")
    return alpha * costs.total(desc) + (1.0 - alpha) * desc.cardinality()


def episode_cost(slot_costs: Sequence[float]) -> float:
    if len(slot_costs) == 0:
        raise EmptyEpisode("episode has no slots")
    return float(sum(slot_costs))


def objective_contribution(
    episode_cost: float, episode_length: int, delta: float, completed: bool = True
) -> float:
    if completed and episode_length < MIN_TASK_LENGTH:
        raise LengthBelowMinimum(
            f"completed episode of length {episode_length} < {MIN_TASK_LENGTH}"
        )
    return delta * episode_cost + (1.0 - delta) * episode_length


def subsets_of_cardinality(base: BeliefSet, l: int) -> list[BeliefSet]:
    members = base.members()
    if not 0 <= l <= len(members):
        raise CardinalityOutOfRange(f"l={l} outside [0, {len(members)}]")
    masks = sorted(sum(1 << b for b in combo) for combo in combinations(members, l))
    return [BeliefSet(m, base.width) for m in masks]


def satisfies_cardinality_constraint(desc: BeliefSet, B: int) -> bool:
    return 1 <= desc.cardinality() <= B // 2

