"""General (non-linear, monotone) reward algorithms.

Indices for a monotone reward are computed as exact expectations under
per-arm confidence distributions: shifting an empirical CDF down (mass moved
to the atom at 1) first-order dominates the data and yields an optimistic
index; shifting it up (mass moved to 0) yields the pessimistic one.  Unseen
arms use the limiting point masses at 1 and 0 respectively, which keeps the
indices total.

AroqGrCmab / SroqGrCmab reuse the linear algorithms' control flow and swap in
these expectation objectives.  An optional discretization mode rounds each
observation up to a 1/s grid before it enters the statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .algo_linear import AroqCmab, SroqCmab
from .core import Action, Observation
from .oracle import GeneralEvaluator

DEFAULT_JOINT_BUDGET = 1_000_000


class JointSupportBudgetExceeded(RuntimeError):
    def __init__(self, size: int, budget: int):
        super().__init__(f"joint support has {size} outcomes, exceeds budget {budget}")
        self.size = size
        self.budget = budget


class EmpiricalCdf:
    """Observed-value multiset for one arm with CDF evaluation."""

    def __init__(self):
        self.counts: dict[float, int] = {}
        self.n = 0

    def add(self, value: float) -> None:
        self.counts[value] = self.counts.get(value, 0) + 1
        self.n += 1

    def distinct(self) -> list[float]:
        return sorted(self.counts)

    def evaluate(self, x: float) -> float:
        """F_hat(x): fraction of observations <= x."""
        if self.n == 0:
            raise ValueError("empty sample has no CDF")
        return sum(c for v, c in self.counts.items() if v <= x) / self.n


@dataclass(frozen=True)
class ShiftedDist:
    """Discrete distribution obtained by shifting an empirical CDF by epsilon.

    direction "lower": CDF max(F_hat - eps, 0) with the clipped mass on the
    atom at 1 (stochastically dominates the data).  "upper": CDF
    min(F_hat + eps, 1) with the extra mass on the atom at 0 (dominated).
    """

    direction: str
    atoms: tuple[float, ...]
    masses: tuple[float, ...]

    def cdf(self, x: float) -> float:
        return sum(m for a, m in zip(self.atoms, self.masses) if a <= x)

    def expectation(self) -> float:
        return sum(a * m for a, m in zip(self.atoms, self.masses))

    @staticmethod
    def point_mass(value: float, direction: str) -> "ShiftedDist":
        return ShiftedDist(direction, (value,), (1.0,))


def shifted_distribution(cdf: EmpiricalCdf, direction: str, epsilon: float) -> ShiftedDist:
    if cdf.n < 1:
        raise ValueError("need at least one observation")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    values = cdf.distinct()

    if direction == "lower":
        atoms = values if values[-1] == 1.0 else values + [1.0]
        cum = 0
        levels = []
        for a in atoms[:-1]:
            cum += cdf.counts.get(a, 0)
            levels.append(max(cum / cdf.n - epsilon, 0.0))
        levels.append(1.0)
    elif direction == "upper":
        atoms = values if values[0] == 0.0 else [0.0] + values
        cum = 0
        levels = []
        for a in atoms[:-1]:
            cum += cdf.counts.get(a, 0)
            levels.append(min(cum / cdf.n + epsilon, 1.0))
        levels.append(1.0)
    else:
        raise ValueError(f"unknown direction {direction!r}")

    masses, prev = [], 0.0
    for lv in levels:
        masses.append(lv - prev)
        prev = lv
    kept = [(a, m) for a, m in zip(atoms, masses) if m > 0.0]
    return ShiftedDist(direction, tuple(a for a, _ in kept), tuple(m for _, m in kept))


def expected_value(
    dists: Sequence[ShiftedDist],
    action: Action,
    reward_fn: Callable[[Action, np.ndarray], float],
    budget: int = DEFAULT_JOINT_BUDGET,
) -> float:
    """Exact expectation of reward(action, y) with y_i ~ dists[i] independently.

    dists is indexed by arm; only the activated arms' entries are read.
    """
    arms = action.arms
    size = 1
    for i in arms:
        size *= len(dists[i].atoms)
    if size > budget:
        raise JointSupportBudgetExceeded(size, budget)

    y = np.zeros(action.d)
    per_arm = [tuple(zip(dists[i].atoms, dists[i].masses)) for i in arms]
    total = 0.0
    for combo in product(*per_arm):
        mass = 1.0
        for i, (value, m) in zip(arms, combo):
            y[i] = value
            mass *= m
        total += mass * reward_fn(action, y)
    return total


def discretize_observation(y: float, s: int) -> float:
    """Round y up to the grid {1/s, ..., 1}: interval I_1 = [0, 1/s], I_j = ((j-1)/s, j/s]."""
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"observation {y} outside [0, 1]")
    if s < 1:
        raise ValueError("need s >= 1")
    j = 1 if y <= 1.0 / s else math.ceil(y * s)
    return j / s


class _CdfTracker:
    """Per-arm empirical CDFs plus the optional discretization of intakes."""

    def __init__(self, d: int, discretize: bool, n_intervals: int):
        self.cdfs = [EmpiricalCdf() for _ in range(d)]
        self.discretize = discretize
        self.n_intervals = n_intervals

    def add(self, obs: Observation) -> None:
        for i in obs.action.arms:
            v = obs.feedback[i]
            if self.discretize:
                v = discretize_observation(v, self.n_intervals)
            self.cdfs[i].add(v)

    def dists(self, direction: str, eps_of_n: Callable[[int], float]) -> list[ShiftedDist]:
        out = []
        unseen_value = 1.0 if direction == "lower" else 0.0
        for cdf in self.cdfs:
            if cdf.n == 0:
                out.append(ShiftedDist.point_mass(unseen_value, direction))
            else:
                out.append(shifted_distribution(cdf, direction, eps_of_n(cdf.n)))
        return out


def _intervals_for(m: int, T: int, disc_constant: float) -> int:
    return max(1, math.ceil(disc_constant * math.sqrt(m * T)))


class AroqGrCmab(AroqCmab):
    """Adaptive rare-oracle-query policy for monotone non-linear rewards."""

    def __init__(self, C: float = 1.5, update_every_round: bool = False,
                 discretize: bool = False, disc_constant: float = 1.0,
                 joint_budget: int = DEFAULT_JOINT_BUDGET, label: str | None = None):
        super().__init__(C=C, update_every_round=update_every_round)
        self.discretize = discretize
        self.disc_constant = disc_constant
        self.joint_budget = joint_budget
        if label is None:
            label = "aroq-gr-every" if update_every_round else "aroq-gr"
        self.label = label

    def get_params(self) -> dict:
        return {
            "C": self.C,
            "update_every_round": self.update_every_round,
            "discretize": self.discretize,
            "disc_constant": self.disc_constant,
            "joint_budget": self.joint_budget,
        }

    def start(self, action_set, horizon, oracle, ledger, workers=1, reward_fn=None):
        if reward_fn is None:
            raise ValueError("general-reward algorithms need the reward function")
        super().start(action_set, horizon, oracle, ledger, workers, reward_fn)
        self.tracker = _CdfTracker(
            self.d, self.discretize, _intervals_for(self.m, horizon, self.disc_constant)
        )

    def _objective(self, t: int):
        lt = math.log(t)
        dists = self.tracker.dists("lower", lambda n: math.sqrt(self.C * lt / n))
        return GeneralEvaluator(
            lambda a: expected_value(dists, a, self.reward_fn, self.joint_budget)
        )

    def observe(self, obs: Observation) -> None:
        super().observe(obs)
        self.tracker.add(obs)


class SroqGrCmab(SroqCmab):
    """Scheduled rare-oracle-query policy for monotone non-linear rewards."""

    label = "sroq-gr"

    def __init__(self, C: float = 1.5, M: int | None = None,
                 discretize: bool = False, disc_constant: float = 1.0,
                 joint_budget: int = DEFAULT_JOINT_BUDGET, label: str | None = None):
        super().__init__(C=C, M=M)
        self.discretize = discretize
        self.disc_constant = disc_constant
        self.joint_budget = joint_budget
        if label is not None:
            self.label = label

    def get_params(self) -> dict:
        return {
            "C": self.C,
            "M": self.M,
            "discretize": self.discretize,
            "disc_constant": self.disc_constant,
            "joint_budget": self.joint_budget,
        }

    def start(self, action_set, horizon, oracle, ledger, workers=1, reward_fn=None):
        if reward_fn is None:
            raise ValueError("general-reward algorithms need the reward function")
        super().start(action_set, horizon, oracle, ledger, workers, reward_fn)
        self.tracker = _CdfTracker(
            self.d, self.discretize, _intervals_for(self.m, horizon, self.disc_constant)
        )

    def _shift_objective(self, direction: str):
        lT = math.log(self.T)
        dists = self.tracker.dists(direction, lambda n: math.sqrt(self.C * lT / n))
        return GeneralEvaluator(
            lambda a: expected_value(dists, a, self.reward_fn, self.joint_budget)
        )

    def _ucb_objective(self):
        return self._shift_objective("lower")

    def _lcb_objective(self):
        return self._shift_objective("upper")

    def observe(self, obs: Observation) -> None:
        super().observe(obs)
        self.tracker.add(obs)
