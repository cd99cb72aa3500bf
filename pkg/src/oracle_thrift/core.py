"""Shared domain types: actions, action sets, observations, running statistics.

Arm indices are 0-based everywhere inside the library; anything 1-based is a
presentation concern of the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Mapping

import numpy as np


class DimensionMismatch(ValueError):
    """An action or observation does not match the ambient arm count."""


@dataclass(frozen=True, order=True)
class Action:
    """A subset of base arms, stored as the sorted tuple of activated indices.

    Ordering compares the sorted support tuples, which is the canonical
    tie-break order used by the oracles ({0} < {0,1} < {0,2} < {1} ...).
    """

    arms: tuple[int, ...]
    d: int = field(compare=False)

    def __post_init__(self) -> None:
        if len(self.arms) == 0:
            raise ValueError("an action must activate at least one arm")
        if list(self.arms) != sorted(set(self.arms)):
            raise ValueError("arms must be strictly increasing and unique")
        if self.arms[0] < 0 or self.arms[-1] >= self.d:
            raise DimensionMismatch(f"arm index out of range for d={self.d}")

    @staticmethod
    def of(arms, d: int) -> "Action":
        return Action(tuple(sorted(set(int(i) for i in arms))), d)

    def __contains__(self, arm: int) -> bool:
        return arm in self.arms

    def __len__(self) -> int:
        return len(self.arms)

    @property
    def bits(self) -> tuple[int, ...]:
        """0/1 vector of length d (arm 0 first)."""
        out = [0] * self.d
        for i in self.arms:
            out[i] = 1
        return tuple(out)


@dataclass(frozen=True)
class ActionSet:
    """The feasible action collection over d base arms.

    kind is one of "explicit", "at_most" (popcount in 1..m) or "exact"
    (popcount == m).  Explicit sets enumerate in insertion order; cardinality
    sets enumerate by size then lexicographic support.
    """

    kind: str
    d: int
    m: int
    explicit_actions: tuple[Action, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("explicit", "at_most", "exact"):
            raise ValueError(f"unknown action set kind {self.kind!r}")
        if self.d < 1 or not (1 <= self.m <= self.d):
            raise ValueError("need 1 <= m <= d")
        if self.kind == "explicit":
            acts = self.explicit_actions
            if not acts:
                raise ValueError("explicit action set must be nonempty")
            if len(set(a.arms for a in acts)) != len(acts):
                raise ValueError("explicit action set contains duplicates")
            if any(a.d != self.d for a in acts):
                raise DimensionMismatch("explicit action with wrong dimension")
            if max(len(a) for a in acts) != self.m:
                raise ValueError("m must equal the maximum popcount")

    @staticmethod
    def exact(d: int, m: int) -> "ActionSet":
        return ActionSet("exact", d, m)

    @staticmethod
    def at_most(d: int, m: int) -> "ActionSet":
        return ActionSet("at_most", d, m)

    @staticmethod
    def explicit(actions) -> "ActionSet":
        acts = tuple(actions)
        d = acts[0].d if acts else 0
        m = max((len(a) for a in acts), default=0)
        return ActionSet("explicit", d, max(m, 1), acts)

    def __iter__(self) -> Iterator[Action]:
        if self.kind == "explicit":
            yield from self.explicit_actions
            return
        sizes = range(1, self.m + 1) if self.kind == "at_most" else (self.m,)
        for k in sizes:
            for arms in combinations(range(self.d), k):
                yield Action(arms, self.d)

    def size(self) -> int:
        if self.kind == "explicit":
            return len(self.explicit_actions)
        if self.kind == "exact":
            return math.comb(self.d, self.m)
        return sum(math.comb(self.d, k) for k in range(1, self.m + 1))

    def contains(self, action: Action) -> bool:
        if action.d != self.d:
            return False
        if self.kind == "explicit":
            return action in self.explicit_actions
        if self.kind == "exact":
            return len(action) == self.m
        return 1 <= len(action) <= self.m


@dataclass(frozen=True)
class Observation:
    """Semi-bandit feedback for one round: the per-arm values of the played action."""

    t: int
    action: Action
    feedback: Mapping[int, float]

    def __post_init__(self) -> None:
        if set(self.feedback.keys()) != set(self.action.arms):
            raise ValueError("feedback keys must be exactly the activated arms")


class ArmStats:
    """Per-arm play counts and value sums; means are the normalized sample means."""

    def __init__(self, d: int):
        self.d = d
        self.n = np.zeros(d, dtype=np.int64)
        self.s = np.zeros(d, dtype=np.float64)

    def update(self, obs: Observation) -> None:
        if obs.action.d != self.d:
            raise DimensionMismatch("observation dimension does not match stats")
        for i in obs.action.arms:
            self.n[i] += 1
            self.s[i] += obs.feedback[i]

    def mean(self, i: int) -> float:
        if self.n[i] == 0:
            raise ValueError(f"arm {i} has no observations")
        return float(self.s[i] / self.n[i])

    def means(self, default: float = 0.0) -> np.ndarray:
        """Vector of sample means, with `default` where an arm is unseen."""
        out = np.full(self.d, default, dtype=np.float64)
        seen = self.n > 0
        out[seen] = self.s[seen] / self.n[seen]
        return out

    def copy(self) -> "ArmStats":
        new = ArmStats(self.d)
        new.n = self.n.copy()
        new.s = self.s.copy()
        return new


class PairStats:
    """Co-occurrence counts and product sums for unordered arm pairs.

    Stored sparsely: only pairs that have co-occurred appear.  Diagonal pairs
    (i, i) are included, so count(i, i) mirrors ArmStats.n[i].
    """

    def __init__(self, d: int):
        self.d = d
        self._n: dict[tuple[int, int], int] = {}
        self._p: dict[tuple[int, int], float] = {}

    def update(self, obs: Observation) -> None:
        if obs.action.d != self.d:
            raise DimensionMismatch("observation dimension does not match stats")
        arms = obs.action.arms
        fb = obs.feedback
        for a_idx, i in enumerate(arms):
            yi = fb[i]
            for j in arms[a_idx:]:
                key = (i, j)
                self._n[key] = self._n.get(key, 0) + 1
                self._p[key] = self._p.get(key, 0.0) + yi * fb[j]

    @staticmethod
    def key(i: int, j: int) -> tuple[int, int]:
        return (i, j) if i <= j else (j, i)

    def count(self, i: int, j: int) -> int:
        return self._n.get(self.key(i, j), 0)

    def prod_sum(self, i: int, j: int) -> float:
        return self._p.get(self.key(i, j), 0.0)

    def pairs(self) -> list[tuple[int, int]]:
        """Co-occurred pairs (i <= j) in ascending order."""
        return sorted(self._n.keys())

    def copy(self) -> "PairStats":
        new = PairStats(self.d)
        new._n = dict(self._n)
        new._p = dict(self._p)
        return new


def update_stats(arm_stats: ArmStats, pair_stats: PairStats | None, obs: Observation) -> None:
    """Fold one observation into the running arm (and optionally pair) sums."""
    arm_stats.update(obs)
    if pair_stats is not None:
        pair_stats.update(obs)


@dataclass
class ComplexityLedger:
    """Counters for oracle usage: sequential rounds and individual queries.

    Mutated only by the batch executor (`oracle.execute_batch`); one round of
    possibly-parallel queries costs adaptivity 1 and queries |batch|.
    """

    adaptivity_rounds: int = 0
    total_queries: int = 0

    def charge(self, n_queries: int) -> None:
        if n_queries < 1:
            raise ValueError("a query round must contain at least one query")
        self.adaptivity_rounds += 1
        self.total_queries += n_queries

    def snapshot(self) -> tuple[int, int]:
        return (self.adaptivity_rounds, self.total_queries)
