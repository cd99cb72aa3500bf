"""Worst-case linear-reward algorithms.

AroqCmab queries the oracle only when some arm's in-epoch play count crosses
an adaptive square-root threshold; between queries it replays the held
action.  With update_every_round=True every round triggers, which is exactly
the classical per-round CUCB baseline.  With alpha < 1 the oracle is replaced
by an alpha-approximate wrapper and regret is measured against alpha * r(a*).

SroqCmab runs on a fixed doubly-logarithmic epoch grid: one parallel batch
per epoch computes a UCB-maximizing representative action per surviving arm
plus the max-LCB action, eliminates arms whose representative falls below the
max LCB, and round-robins the representatives until the next boundary.
"""

from __future__ import annotations

import math

import numpy as np

from .base import BanditAlgorithm
from .core import Action, ArmStats, Observation
from .oracle import (
    LinearWeights,
    OracleBatch,
    OracleQuery,
    execute_batch,
    first_feasible,
    wrap_alpha,
)
from .schedule import build_grid, default_M


def ucb_index_adaptive(action: Action, stats: ArmStats, t: int, C: float) -> float:
    """Sum over activated arms of mean + sqrt(C ln t / n); +inf if any arm is unseen."""
    total = 0.0
    lt = math.log(t)
    for i in action.arms:
        n = stats.n[i]
        if n == 0:
            return math.inf
        total += stats.s[i] / n + math.sqrt(C * lt / n)
    return total


def aroq_trigger(c: int, p: int, T: int, m: int, d: int) -> bool:
    """True when the current-epoch play count crosses 1 + sqrt(T m p / d)."""
    return c >= 1.0 + math.sqrt(T * m * p / d)


def _confidence_weights(stats: ArmStats, log_term: float, C: float, sign: float) -> np.ndarray:
    """Per-arm mean + sign*sqrt(C*log_term/n), with sign*inf where unseen."""
    n = stats.n
    w = np.full(stats.d, sign * math.inf)
    seen = n > 0
    ns = n[seen].astype(np.float64)
    w[seen] = stats.s[seen] / ns + sign * np.sqrt(C * log_term / ns)
    return w


class AroqCmab(BanditAlgorithm):
    """Adaptive rare-oracle-query policy for linear rewards (CUCB when forced)."""

    def __init__(self, C: float = 1.5, update_every_round: bool = False,
                 alpha: float = 1.0, alpha_sample: int = 64, label: str | None = None):
        self.C = C
        self.update_every_round = update_every_round
        self.alpha = alpha
        self.alpha_sample = alpha_sample
        self.regret_alpha = alpha
        if label is None:
            label = "cucb" if update_every_round else ("alpha-aroq" if alpha < 1.0 else "aroq")
        self.label = label

    def get_params(self) -> dict:
        return {
            "C": self.C,
            "update_every_round": self.update_every_round,
            "alpha": self.alpha,
            "alpha_sample": self.alpha_sample,
        }

    def start(self, action_set, horizon, oracle, ledger, workers=1, reward_fn=None):
        super().start(action_set, horizon, oracle, ledger, workers, reward_fn)
        self.oracle = wrap_alpha(oracle, self.alpha, self.alpha_sample)
        self.stats = ArmStats(self.d)
        self.epoch = np.ones(self.d, dtype=np.int64)
        self.cur = np.zeros(self.d, dtype=np.int64)   # plays in the running epoch
        self.prev = np.zeros(self.d, dtype=np.int64)  # plays in the finished epoch
        self.a_cur: Action | None = None
        self._snap_t = 0
        self._snap_n: np.ndarray | None = None
        self._snap_mu: np.ndarray | None = None
        self.n_updates = 0

    def _advance(self, idx: np.ndarray) -> None:
        self.epoch[idx] += 1
        self.prev[idx] = self.cur[idx]
        self.cur[idx] = 0

    def _objective(self, t: int):
        return LinearWeights(_confidence_weights(self.stats, math.log(t), self.C, +1.0))

    def select(self, t: int) -> Action:
        if t == 1:
            # cold start: every arm opens a fresh epoch and one query is issued
            self._advance(np.arange(self.d))
            update = True
        elif self.update_every_round:
            self._advance(np.arange(self.d))
            update = True
        else:
            thresh = 1.0 + np.sqrt(self.T * self.m * self.prev.astype(np.float64) / self.d)
            trig = np.nonzero(self.cur >= thresh)[0]
            if trig.size:
                self._advance(trig)
            update = trig.size > 0

        if update or self.a_cur is None:
            query = OracleQuery(self._objective(t), self.action_set)
            result = execute_batch(self.oracle, OracleBatch((query,)), self.ledger, self.workers)[0]
            self.a_cur = result.action
            self._snap_t = t
            self._snap_n = self.stats.n.copy()
            self._snap_mu = self.stats.means()
            self.n_updates += 1
        return self.a_cur

    def observe(self, obs: Observation) -> None:
        self.stats.update(obs)
        for i in obs.action.arms:
            self.cur[i] += 1

    def frozen_ucb(self, action: Action, t: int) -> float:
        """UCB of `action` at time t using the statistics frozen at the last query."""
        if self._snap_n is None:
            return math.inf
        total = 0.0
        lt = math.log(t)
        for i in action.arms:
            n = self._snap_n[i]
            if n == 0:
                return math.inf
            total += self._snap_mu[i] + math.sqrt(self.C * lt / n)
        return total


class SroqCmab(BanditAlgorithm):
    """Scheduled rare-oracle-query policy for linear rewards (elimination-based)."""

    label = "sroq"

    def __init__(self, C: float = 1.5, M: int | None = None, label: str | None = None):
        self.C = C
        self.M = M
        if label is not None:
            self.label = label

    def get_params(self) -> dict:
        return {"C": self.C, "M": self.M}

    def start(self, action_set, horizon, oracle, ledger, workers=1, reward_fn=None):
        super().start(action_set, horizon, oracle, ledger, workers, reward_fn)
        self.grid = build_grid(horizon, self.M if self.M is not None else default_M(horizon))
        self.stats = ArmStats(self.d)
        self.surviving: list[int] = list(range(self.d))
        self.reps: dict[int, Action] = {}
        self._epoch_ptr = 0
        self.epoch_log: list[dict] = []

    def _ucb_objective(self):
        return LinearWeights(_confidence_weights(self.stats, math.log(self.T), self.C, +1.0))

    def _lcb_objective(self):
        return LinearWeights(_confidence_weights(self.stats, math.log(self.T), self.C, -1.0))

    def _feasible_arm(self, i: int, arms: frozenset[int]) -> bool:
        if self.action_set.kind != "explicit":
            return True
        probe = OracleQuery(self._ucb_objective(), self.action_set,
                            must_include=frozenset({i}), surviving_arms=arms)
        return first_feasible(probe) is not None

    def _run_epoch(self, tau: int) -> None:
        prev = [i for i in self.surviving if self._feasible_arm(i, frozenset(self.surviving))]
        arms_c = frozenset(prev)
        ucb = self._ucb_objective()
        queries = [
            OracleQuery(ucb, self.action_set, must_include=frozenset({i}), surviving_arms=arms_c)
            for i in prev
        ]
        queries.append(OracleQuery(self._lcb_objective(), self.action_set, surviving_arms=arms_c))
        results = execute_batch(self.oracle, OracleBatch(tuple(queries)), self.ledger, self.workers)

        max_lcb = results[-1].value
        keep = [i for i, r in zip(prev, results) if r.value >= max_lcb]
        if not keep:  # impossible under exact arithmetic; keep the max-LCB support
            keep = list(results[-1].action.arms)
        self.surviving = keep
        kept = set(keep)
        self.reps = {i: r.action for i, r in zip(prev, results) if i in kept}
        self.epoch_log.append({
            "tau": tau,
            "surviving": list(keep),
            "representatives": {i: list(self.reps[i].arms) for i in keep},
            "max_lcb": max_lcb,
        })

    def select(self, t: int) -> Action:
        while self._epoch_ptr < self.grid.M and t == self.grid.boundaries[self._epoch_ptr]:
            self._run_epoch(self._epoch_ptr + 1)
            self._epoch_ptr += 1
        i = self.surviving[t % len(self.surviving)]
        return self.reps[i]

    def observe(self, obs: Observation) -> None:
        self.stats.update(obs)
