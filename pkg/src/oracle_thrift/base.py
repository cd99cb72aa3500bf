"""Online policy interface shared by all algorithms.

One instance drives one trial: bind it to an action set, horizon, oracle and
ledger with start(), then alternate select(t) / observe(obs) for t = 1..T.
Constructors take hyperparameters only, so get_params() echoes exactly what a
run config supplied.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Callable

import numpy as np

from .core import Action, ActionSet, ComplexityLedger, Observation


class BanditAlgorithm(ABC):
    label: str = "base"
    regret_alpha: float = 1.0  # regret is measured against regret_alpha * r(a*)

    def start(
        self,
        action_set: ActionSet,
        horizon: int,
        oracle,
        ledger: ComplexityLedger,
        workers: int = 1,
        reward_fn: Callable[[Action, np.ndarray], float] | None = None,
    ) -> None:
        self.action_set = action_set
        self.T = horizon
        self.d = action_set.d
        self.m = action_set.m
        self.oracle = oracle
        self.ledger = ledger
        self.workers = workers
        self.reward_fn = reward_fn

    @abstractmethod
    def select(self, t: int) -> Action: ...

    @abstractmethod
    def observe(self, obs: Observation) -> None: ...

    @abstractmethod
    def get_params(self) -> dict: ...
