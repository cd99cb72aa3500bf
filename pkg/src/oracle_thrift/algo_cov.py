"""Covariance-adaptive algorithms and their estimator stack.

The confidence set is an ellipsoid in the gram matrix
G = sum_s D_{a_s} SigmaBar D_{a_s} + D_SigmaBar D_n + I, where SigmaBar is an
elementwise upper-confidence covariance estimate.  The quadratic form
a^T D_n^-1 G D_n^-1 a collapses to a pair-count expression costing O(|a|^2),
which is what CovIndex precomputes per oracle call.

AroqCCmab warms up by cycling actions that cover every arm pair, then queries
only when some pair's in-epoch co-occurrence count doubles.  SroqCCmab runs
the scheduled grid with a two-phase epoch (singleton representatives, then
pair representatives) and two elimination rounds per epoch.
"""

from __future__ import annotations

import math

import numpy as np

from .base import BanditAlgorithm
from .core import Action, ArmStats, Observation, PairStats
from .oracle import (
    GeneralEvaluator,
    OracleBatch,
    OracleQuery,
    execute_batch,
    first_feasible,
    smallest_action_containing,
)
from .schedule import build_grid, default_M


class UnseenArm(ValueError):
    """The ellipsoidal index is undefined while some activated arm has no data."""


def confidence_radius_h(time: float, d: int, c_h: float = 1.0) -> float:
    return c_h * math.sqrt(math.log(time) + math.log(d))


def confidence_width_f(time: float, d: int, c_f: float = 1.0) -> float:
    return c_f * (math.log(time) + d * math.log(math.log(max(time, 3.0))))


def sigma_hat_entry(arm_stats: ArmStats, pair_stats: PairStats, i: int, j: int) -> float:
    """Empirical covariance entry: product mean minus the product of means."""
    n_ij = pair_stats.count(i, j)
    if n_ij == 0 or arm_stats.n[i] == 0 or arm_stats.n[j] == 0:
        raise UnseenArm(f"pair ({i},{j}) has no co-occurrences")
    s_hat = pair_stats.prod_sum(i, j) / n_ij
    return s_hat - arm_stats.mean(i) * arm_stats.mean(j)


def sigma_bar_entry(arm_stats: ArmStats, pair_stats: PairStats, i: int, j: int,
                    h: float) -> float:
    """Upper-confidence covariance entry Sigma_hat + (5h/sqrt(n) + h^2/n + 1/n^2)/4."""
    n_ij = pair_stats.count(i, j)
    bonus = 0.25 * (5.0 * h / math.sqrt(n_ij) + h * h / n_ij + 1.0 / n_ij ** 2)
    return sigma_hat_entry(arm_stats, pair_stats, i, j) + bonus


def sigma_hat_matrix(arm_stats: ArmStats, pair_stats: PairStats) -> np.ndarray:
    """Dense empirical covariance; NaN where a pair has never co-occurred."""
    d = arm_stats.d
    out = np.full((d, d), np.nan)
    for (i, j) in pair_stats.pairs():
        v = sigma_hat_entry(arm_stats, pair_stats, i, j)
        out[i, j] = out[j, i] = v
    return out


def sigma_bar_matrix(arm_stats: ArmStats, pair_stats: PairStats, time: float,
                     c_h: float = 1.0) -> np.ndarray:
    d = arm_stats.d
    h = confidence_radius_h(time, d, c_h)
    out = np.full((d, d), np.nan)
    for (i, j) in pair_stats.pairs():
        v = sigma_bar_entry(arm_stats, pair_stats, i, j, h)
        out[i, j] = out[j, i] = v
    return out


class CovIndex:
    """Frozen covariance-adaptive UCB/LCB evaluator at one query time.

    Precomputes per-arm diagonal terms and per-pair cross terms of the
    quadratic form so each action evaluation costs O(|a|^2) lookups.
    """

    def __init__(self, arm_stats: ArmStats, pair_stats: PairStats, time: float,
                 c_h: float = 1.0, c_f: float = 1.0):
        d = arm_stats.d
        self.d = d
        self.h = confidence_radius_h(time, d, c_h)
        self.f = confidence_width_f(time, d, c_f)
        n = arm_stats.n
        self.mu = arm_stats.means()
        self.seen = n > 0
        self.diag = np.full(d, np.nan)
        for i in range(d):
            if n[i] == 0:
                continue
            sbar_ii = sigma_bar_entry(arm_stats, pair_stats, i, i, self.h)
            self.diag[i] = 2.0 * sbar_ii / n[i] + 1.0 / n[i] ** 2
        self.cross: dict[tuple[int, int], float] = {}
        for (i, j) in pair_stats.pairs():
            if i == j:
                continue
            sbar = sigma_bar_entry(arm_stats, pair_stats, i, j, self.h)
            n_ij = pair_stats.count(i, j)
            self.cross[(i, j)] = 2.0 * n_ij * sbar / (n[i] * n[j])

    def quadform(self, action: Action) -> float:
        arms = action.arms
        total = 0.0
        for i in arms:
            di = self.diag[i]
            if math.isnan(di):
                raise UnseenArm(f"arm {i} has no observations")
            total += di
        cross = self.cross
        for a_idx, i in enumerate(arms):
            for j in arms[a_idx + 1:]:
                total += cross.get((i, j), 0.0)
        return max(total, 0.0)  # SigmaBar need not be PSD numerically

    def mean_reward(self, action: Action) -> float:
        return float(sum(self.mu[i] for i in action.arms))

    def ucb(self, action: Action) -> float:
        return self.mean_reward(action) + self.f * math.sqrt(self.quadform(action))

    def lcb(self, action: Action) -> float:
        return self.mean_reward(action) - self.f * math.sqrt(self.quadform(action))


def ellipsoid_quadform(action: Action, arm_stats: ArmStats, pair_stats: PairStats,
                       time: float, c_h: float = 1.0) -> float:
    """The pair-count form of ||D_n^-1 a||^2 in the gram-matrix norm."""
    return CovIndex(arm_stats, pair_stats, time, c_h=c_h).quadform(action)


def cov_ucb(action: Action, arm_stats: ArmStats, pair_stats: PairStats, time: float,
            c_h: float = 1.0, c_f: float = 1.0) -> float:
    return CovIndex(arm_stats, pair_stats, time, c_h=c_h, c_f=c_f).ucb(action)


def pair_enumeration(d: int) -> list[tuple[int, int]]:
    """The fixed warm-up order over all d(d+1)/2 arm pairs, diagonal included."""
    return [(i, j) for i in range(d) for j in range(i, d)]


def warmup_length(d: int, T: int, warmup_cap: int | None) -> tuple[int, bool]:
    """Warm-up rounds: ceil(d(d+1) ln^3(T) / 2) capped at floor(T/10) (or the
    supplied cap).  Returns (W, capped?)."""
    nominal = math.ceil(d * (d + 1) * math.log(T) ** 3 / 2.0)
    cap = warmup_cap if warmup_cap is not None else T // 10
    return min(nominal, cap), nominal > cap


class _PairCoverCursor:
    """Deterministic warm-up plays: the (t mod P)-th pair's smallest covering action."""

    def __init__(self, action_set):
        self.pairs = pair_enumeration(action_set.d)
        self.actions: list[Action | None] = [
            smallest_action_containing(action_set, {i, j}) for (i, j) in self.pairs
        ]
        self.skipped = sum(1 for a in self.actions if a is None)
        self.fallback = next(iter(action_set))

    def action_at(self, t: int) -> Action:
        P = len(self.pairs)
        for off in range(P):
            a = self.actions[(t + off) % P]
            if a is not None:
                return a
        return self.fallback


class AroqCCmab(BanditAlgorithm):
    """Adaptive rare-oracle-query policy with covariance-adaptive confidence."""

    def __init__(self, c_h: float = 1.0, c_f: float = 1.0,
                 warmup_cap: int | None = None, update_every_round: bool = False,
                 label: str | None = None):
        self.c_h = c_h
        self.c_f = c_f
        self.warmup_cap = warmup_cap
        self.update_every_round = update_every_round
        self.label = label if label is not None else ("aroq-c-every" if update_every_round else "aroq-c")

    def get_params(self) -> dict:
        return {
            "c_h": self.c_h,
            "c_f": self.c_f,
            "warmup_cap": self.warmup_cap,
            "update_every_round": self.update_every_round,
        }

    def start(self, action_set, horizon, oracle, ledger, workers=1, reward_fn=None):
        super().start(action_set, horizon, oracle, ledger, workers, reward_fn)
        d = self.d
        n_pairs = d * (d + 1) // 2
        self.W, self.warmup_capped = warmup_length(d, horizon, self.warmup_cap)
        if self.W < n_pairs:
            raise ValueError(
                f"horizon {horizon} leaves warm-up ({self.W}) shorter than the "
                f"{n_pairs} pair-cover rounds; raise T or warmup_cap"
            )
        self.arm_stats = ArmStats(d)
        self.pair_stats = PairStats(d)
        self.cursor = _PairCoverCursor(action_set)
        # per-pair epoch state, upper triangle used (diagonal included)
        self.epoch = np.zeros((d, d), dtype=np.int64)
        self.cur = np.zeros((d, d), dtype=np.int64)
        self.prev = np.zeros((d, d), dtype=np.int64)
        self.a_cur: Action | None = None
        self._pending = False
        self._adaptive_started = False
        self.n_updates = 0

    def _advance_all(self) -> None:
        self.epoch += 1
        self.prev = self.cur.copy()
        self.cur = np.zeros_like(self.cur)

    def _build_index(self, t: int) -> CovIndex:
        return CovIndex(self.arm_stats, self.pair_stats, float(t), self.c_h, self.c_f)

    def select(self, t: int) -> Action:
        if t <= self.W:
            self.a_cur = self.cursor.action_at(t)
            return self.a_cur

        if not self._adaptive_started:
            # warm-up counts become the previous epoch of every pair
            self._advance_all()
            self._adaptive_started = True
            self._pending = True
        elif self.update_every_round:
            self._advance_all()
            self._pending = True
        else:
            arms = self.a_cur.arms if self.a_cur is not None else ()
            for a_idx, i in enumerate(arms):
                for j in arms[a_idx:]:
                    if self.cur[i, j] >= 1 + 2 * self.prev[i, j]:
                        self.epoch[i, j] += 1
                        self.prev[i, j] = self.cur[i, j]
                        self.cur[i, j] = 0
                        self._pending = True

        if self._pending or self.a_cur is None:
            index = self._build_index(t)
            query = OracleQuery(GeneralEvaluator(index.ucb), self.action_set)
            result = execute_batch(self.oracle, OracleBatch((query,)), self.ledger, self.workers)[0]
            self.a_cur = result.action
            self._pending = False
            self.n_updates += 1
        return self.a_cur

    def observe(self, obs: Observation) -> None:
        self.arm_stats.update(obs)
        self.pair_stats.update(obs)
        arms = obs.action.arms
        for a_idx, i in enumerate(arms):
            for j in arms[a_idx:]:
                self.cur[i, j] += 1


class SroqCCmab(BanditAlgorithm):
    """Scheduled covariance-adaptive policy with single and pair elimination."""

    label = "sroq-c"

    def __init__(self, c_h: float = 1.0, c_f: float = 1.0, M: int | None = None,
                 phase2_clamp: bool = True, label: str | None = None):
        self.c_h = c_h
        self.c_f = c_f
        self.M = M
        self.phase2_clamp = phase2_clamp  # cap phase 2 at half the epoch
        if label is not None:
            self.label = label

    def get_params(self) -> dict:
        return {"c_h": self.c_h, "c_f": self.c_f, "M": self.M,
                "phase2_clamp": self.phase2_clamp}

    def start(self, action_set, horizon, oracle, ledger, workers=1, reward_fn=None):
        super().start(action_set, horizon, oracle, ledger, workers, reward_fn)
        d = self.d
        self.P = d * (d + 1) // 2
        if horizon <= self.P:
            raise ValueError(f"horizon {horizon} does not cover the {self.P}-round pair warm-up")
        self.grid = build_grid(horizon, self.M if self.M is not None else default_M(horizon))
        # epoch windows clipped to the rounds after warm-up
        self.windows = []
        for tau, (start, end) in enumerate(self.grid.epochs(), start=1):
            w_start = max(start, self.P + 1)
            if end > w_start:
                self.windows.append((tau, w_start, end))
        self.arm_stats = ArmStats(d)
        self.pair_stats = PairStats(d)
        self.cursor = _PairCoverCursor(action_set)
        self.surviving: list[int] = list(range(d))
        self.surviving_pairs: list[tuple[int, int]] = [
            (i, j) for i in range(d) for j in range(i + 1, d)
        ]
        self.reps_single: dict[int, Action] = {}
        self.reps_pair: dict[tuple[int, int], Action] = {}
        self._window_ptr = 0
        self._phase1_len = 0
        self._window_start = 0
        self.epoch_log: list[dict] = []

    def _constraints(self, arms: list[int], pairs: list[tuple[int, int]]):
        return frozenset(arms), frozenset(pairs)

    def _run_epoch(self, tau: int, window_len: int) -> None:
        arms_c, pairs_c = self._constraints(self.surviving, self.surviving_pairs)
        index = CovIndex(self.arm_stats, self.pair_stats, float(self.T), self.c_h, self.c_f)
        ucb = GeneralEvaluator(index.ucb)
        lcb = GeneralEvaluator(index.lcb)

        def q(objective, must=frozenset()):
            return OracleQuery(objective, self.action_set, must_include=must,
                               surviving_arms=arms_c, surviving_pairs=pairs_c)

        arms = [i for i in self.surviving if first_feasible(q(ucb, frozenset({i}))) is not None]
        pairs = [p for p in self.surviving_pairs
                 if first_feasible(q(ucb, frozenset(p))) is not None]

        queries = [q(ucb, frozenset({i})) for i in arms]
        queries += [q(ucb, frozenset(p)) for p in pairs]
        queries.append(q(lcb))
        results = execute_batch(self.oracle, OracleBatch(tuple(queries)), self.ledger, self.workers)
        res_single = results[:len(arms)]
        res_pair = results[len(arms):len(arms) + len(pairs)]
        max_lcb = results[-1].value

        keep_arms = [i for i, r in zip(arms, res_single) if r.value >= max_lcb]
        if not keep_arms:
            keep_arms = list(results[-1].action.arms)
        kept = set(keep_arms)

        # second elimination round: max LCB over the arm-restricted set
        lcb_query = OracleQuery(lcb, self.action_set, surviving_arms=frozenset(keep_arms),
                                surviving_pairs=pairs_c)
        res_lcb2 = execute_batch(self.oracle, OracleBatch((lcb_query,)), self.ledger, self.workers)[0]

        keep_pairs = [
            p for p, r in zip(pairs, res_pair)
            if p[0] in kept and p[1] in kept and r.value >= res_lcb2.value
        ]
        if not keep_pairs and self.m >= 2:
            a2 = res_lcb2.action.arms
            keep_pairs = [(a2[x], a2[y]) for x in range(len(a2)) for y in range(x + 1, len(a2))]

        self.surviving = keep_arms
        self.surviving_pairs = keep_pairs
        self.reps_single = {i: r.action for i, r in zip(arms, res_single) if i in kept}
        pair_set = set(keep_pairs)
        self.reps_pair = {p: r.action for p, r in zip(pairs, res_pair) if p in pair_set}

        if keep_pairs:
            nominal = math.ceil(
                (self.d ** 2 * self.m ** 2 * window_len * math.log(self.T)) ** (2.0 / 3.0))
            cap = window_len // 2 if self.phase2_clamp else window_len
            phase2 = min(cap, nominal)
        else:
            phase2 = 0
        self._phase1_len = window_len - phase2
        self.epoch_log.append({
            "tau": tau,
            "surviving": list(keep_arms),
            "surviving_pairs": [list(p) for p in keep_pairs],
            "phase1_len": self._phase1_len,
            "phase2_len": phase2,
            "max_lcb": max_lcb,
            "max_lcb_restricted": res_lcb2.value,
        })

    def select(self, t: int) -> Action:
        if t <= self.P:
            return self.cursor.action_at(t)
        if self._window_ptr < len(self.windows):
            tau, w_start, w_end = self.windows[self._window_ptr]
            if t == w_start:
                self._run_epoch(tau, w_end - w_start)
                self._window_start = w_start
                self._window_ptr += 1
        offset = t - self._window_start
        if offset < self._phase1_len or not self.surviving_pairs:
            i = self.surviving[t % len(self.surviving)]
            # a representative may be missing if the arm was kept by the guard
            rep = self.reps_single.get(i)
            if rep is None:
                rep = next(iter(self.reps_single.values()))
            return rep
        p = self.surviving_pairs[t % len(self.surviving_pairs)]
        return self.reps_pair.get(p) or next(iter(self.reps_pair.values()))

    def observe(self, obs: Observation) -> None:
        self.arm_stats.update(obs)
        self.pair_stats.update(obs)
