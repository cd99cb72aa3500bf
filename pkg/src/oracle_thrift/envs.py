"""Seeded synthetic environments with exact expected rewards.

Each environment owns its parameters (drawn once from env_seed), samples a
full reward vector per round from a caller-supplied generator, and exposes
the exact expectation of any action's reward so the runner can account
pseudo-regret without Monte Carlo error.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Protocol

import numpy as np

from .core import Action, ActionSet
from .oracle import ExactOracle, GeneralEvaluator, LinearWeights, OracleQuery


class Environment(Protocol):
    kind: str
    action_set: ActionSet

    def sample(self, rng: np.random.Generator) -> np.ndarray: ...
    def reward_of(self, action: Action, y: np.ndarray) -> float: ...
    def expected_reward(self, action: Action) -> float: ...
    def metadata(self) -> dict: ...


def _make_action_set(d: int, m: int, exact_m: bool) -> ActionSet:
    return ActionSet.exact(d, m) if exact_m else ActionSet.at_most(d, m)


class LinearUniformEnv:
    """Linear reward with independent uniform noise around Uniform[0,1] means.

    The per-arm noise half-width is min(mu_i, 1 - mu_i) (scaled by
    noise_scale), so samples stay in [0,1] and the mean is exactly mu_i
    without any clipping bias.
    """

    kind = "linear"

    def __init__(self, d: int = 20, m: int = 3, env_seed: int = 1,
                 exact_m: bool = True, noise_scale: float = 1.0):
        rng = np.random.default_rng(env_seed)
        self.d = d
        self.m = m
        self.env_seed = env_seed
        self.noise_scale = float(noise_scale)
        self.mu = rng.uniform(0.0, 1.0, size=d)
        self.half_width = np.minimum(self.mu, 1.0 - self.mu) * self.noise_scale
        self.action_set = _make_action_set(d, m, exact_m)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.mu + self.half_width * (2.0 * rng.random(self.d) - 1.0)

    def reward_of(self, action: Action, y: np.ndarray) -> float:
        return float(sum(y[i] for i in action.arms))

    def expected_reward(self, action: Action) -> float:
        return float(sum(self.mu[i] for i in action.arms))

    def metadata(self) -> dict:
        return {
            "kind": self.kind, "d": self.d, "m": self.m,
            "env_seed": self.env_seed, "noise_scale": self.noise_scale,
            "action_kind": self.action_set.kind,
            "mu": [float(x) for x in self.mu],
        }


class CovarianceGaussianEnv:
    """Linear reward with correlated Gaussian noise.

    Sigma = (A A^T + I) / (2 max_i diag), A standard normal, so the largest
    marginal standard deviation is 1/sqrt(2).  Samples may leave [0,1]; the
    covariance algorithms consume them as-is (documented model deviation).
    """

    kind = "cov"

    def __init__(self, d: int = 10, m: int = 3, env_seed: int = 1,
                 exact_m: bool = True, noise_scale: float = 1.0):
        rng = np.random.default_rng(env_seed)
        self.d = d
        self.m = m
        self.env_seed = env_seed
        self.noise_scale = float(noise_scale)
        self.mu = rng.uniform(0.0, 1.0, size=d)
        a = rng.standard_normal((d, d))
        raw = a @ a.T + np.eye(d)
        self.sigma = raw / (2.0 * raw.diagonal().max())
        self._chol = np.linalg.cholesky(self.sigma)
        self.action_set = _make_action_set(d, m, exact_m)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(self.d)
        if self.noise_scale == 0.0:
            return self.mu.copy()
        return self.mu + self.noise_scale * (self._chol @ z)

    def reward_of(self, action: Action, y: np.ndarray) -> float:
        return float(sum(y[i] for i in action.arms))

    def expected_reward(self, action: Action) -> float:
        return float(sum(self.mu[i] for i in action.arms))

    def sigma_sq(self, i: int, action: Action) -> float:
        """Clipped variance contribution of arm i under the action."""
        return float(sum(max(self.sigma[i, j], 0.0) for j in action.arms))

    def metadata(self) -> dict:
        return {
            "kind": self.kind, "d": self.d, "m": self.m,
            "env_seed": self.env_seed, "noise_scale": self.noise_scale,
            "action_kind": self.action_set.kind,
            "mu": [float(x) for x in self.mu],
            "sigma": [[float(x) for x in row] for row in self.sigma],
        }


class GeneralDiscreteEnv:
    """Non-linear monotone reward over a 5-point discrete support.

    Each arm gets one dominant value (chosen at construction) with mass 0.99;
    the remaining 0.01 is split over the other four support points.  The
    action reward is sqrt of the sum of the activated arms' values, so the
    maximum reward is L = sqrt(m).
    """

    kind = "general"
    support = (0.2, 0.4, 0.6, 0.8, 1.0)

    def __init__(self, d: int = 5, m: int = 2, env_seed: int = 1,
                 exact_m: bool = True):
        rng = np.random.default_rng(env_seed)
        self.d = d
        self.m = m
        self.env_seed = env_seed
        k = len(self.support)
        self.dominant = rng.integers(0, k, size=d)
        self.probs = np.full((d, k), 0.01 / (k - 1))
        self.probs[np.arange(d), self.dominant] = 0.99
        self._cum = np.cumsum(self.probs, axis=1)
        self._support_arr = np.asarray(self.support)
        self.L = math.sqrt(m)
        self.action_set = _make_action_set(d, m, exact_m)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(self.d)
        idx = (u[:, None] > self._cum).sum(axis=1)
        # float cumsum can land a hair under 1.0
        return self._support_arr[np.minimum(idx, len(self.support) - 1)]

    def reward_of(self, action: Action, y: np.ndarray) -> float:
        return math.sqrt(sum(y[i] for i in action.arms))

    def arm_distribution(self, i: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
        return self.support, tuple(float(p) for p in self.probs[i])

    def expected_reward(self, action: Action) -> float:
        """Exact expectation by joint enumeration over <= 5^|a| outcomes."""
        arms = action.arms
        total = 0.0
        y = np.zeros(self.d)
        for combo in product(range(len(self.support)), repeat=len(arms)):
            mass = 1.0
            for i, v_idx in zip(arms, combo):
                mass *= self.probs[i, v_idx]
                y[i] = self.support[v_idx]
            total += mass * self.reward_of(action, y)
        return total

    def metadata(self) -> dict:
        return {
            "kind": self.kind, "d": self.d, "m": self.m,
            "env_seed": self.env_seed, "L": self.L,
            "action_kind": self.action_set.kind,
            "support": list(self.support),
            "dominant_values": [float(self.support[i]) for i in self.dominant],
        }


def optimal_action(env: Environment) -> tuple[Action, float]:
    """Exact argmax of the expected reward; bookkeeping only, never metered."""
    oracle = ExactOracle()
    if env.kind in ("linear", "cov"):
        objective = LinearWeights(env.mu)
    else:
        objective = GeneralEvaluator(env.expected_reward)
    result = oracle.solve(OracleQuery(objective, env.action_set))
    return result.action, result.value


def sigma_profile(env: CovarianceGaussianEnv) -> dict:
    """Per-arm max variance contribution and the max action total, by enumeration."""
    per_arm = np.zeros(env.d)
    max_total = 0.0
    for a in env.action_set:
        total = 0.0
        for i in a.arms:
            s = env.sigma_sq(i, a)
            per_arm[i] = max(per_arm[i], s)
            total += s
        max_total = max(max_total, total)
    return {
        "per_arm_max": [float(x) for x in per_arm],
        "sum_per_arm_max": float(per_arm.sum()),
        "max_action_total": float(max_total),
    }


def make_env(kind: str, d: int, m: int, env_seed: int,
             noise_scale: float = 1.0, exact_m: bool = True):
    if kind == "linear":
        return LinearUniformEnv(d, m, env_seed, exact_m, noise_scale)
    if kind == "cov":
        return CovarianceGaussianEnv(d, m, env_seed, exact_m, noise_scale)
    if kind == "general":
        return GeneralDiscreteEnv(d, m, env_seed, exact_m)
    raise ValueError(f"unknown environment kind {kind!r}")
