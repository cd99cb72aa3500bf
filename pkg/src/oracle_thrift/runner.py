"""Trial execution, exact regret accounting, and result persistence.

Regret is pseudo-regret: the per-round gap of expected rewards against the
algorithm's reference (r(a*) in general, alpha * r(a*) for the approximate
oracle variant).  The optimal action is computed once per trial outside the
metered oracle path.  Checkpoints are taken on a uniform cadence plus at
every oracle batch, so the complexity step functions are captured exactly.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Action, ComplexityLedger, Observation
from .envs import make_env, optimal_action, sigma_profile
from .oracle import ExactOracle
from .registry import ConfigError, make_algorithm, validate_algo_env
from .schedule import default_M

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "run_id", "algo", "env", "d", "m", "T", "seed",
    "t", "cum_regret", "cum_adaptivity", "cum_queries", "elapsed_ms",
)
MAX_CHECKPOINTS = 10_000


@dataclass(frozen=True)
class RunConfig:
    algo: str
    env: str
    d: int
    m: int
    T: int
    seeds: tuple[int, ...]
    env_seed: int = 1
    noise_scale: float = 1.0
    checkpoint_every: int | None = None
    workers: int = 1
    params: dict = field(default_factory=dict)

    def cadence(self) -> int:
        ce = self.checkpoint_every if self.checkpoint_every is not None else max(1, self.T // 100)
        return ce

    def validate(self) -> None:
        if self.T < 1:
            raise ConfigError("T must be >= 1")
        if not self.seeds:
            raise ConfigError("need at least one trial seed")
        if not (1 <= self.m <= self.d):
            raise ConfigError("need 1 <= m <= d")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        ce = self.cadence()
        if ce < 1 or math.ceil(self.T / ce) > MAX_CHECKPOINTS:
            raise ConfigError(
                f"checkpoint_every={ce} yields more than {MAX_CHECKPOINTS} checkpoints"
            )
        validate_algo_env(self.algo, self.env)
        make_algorithm(self.algo, self.params)  # surfaces hyperparameter mismatches

    def to_json_dict(self) -> dict:
        return {
            "algo": self.algo, "env": self.env, "d": self.d, "m": self.m,
            "T": self.T, "seeds": list(self.seeds), "env_seed": self.env_seed,
            "noise_scale": self.noise_scale, "checkpoint_every": self.cadence(),
            "workers": self.workers, "params": dict(self.params),
        }


@dataclass
class Checkpoint:
    t: int
    cum_regret: float
    cum_adaptivity: int
    cum_queries: int
    elapsed_ms: float


@dataclass
class RunRecord:
    run_id: str
    algo: str
    env: str
    d: int
    m: int
    T: int
    seed: int
    checkpoints: list[Checkpoint]
    astar: list[int]
    rstar: float
    regret_alpha: float
    extras: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]


def _run_id(config: RunConfig, seed: int) -> str:
    return f"{config.algo}-{config.env}-d{config.d}-m{config.m}-T{config.T}-s{seed}"


def run_trial(config: RunConfig, seed: int) -> RunRecord:
    """One seeded closed-loop trial; deterministic given (env_seed, seed)."""
    env = make_env(config.env, config.d, config.m, config.env_seed, config.noise_scale)
    algo = make_algorithm(config.algo, config.params)
    ledger = ComplexityLedger()
    algo.start(env.action_set, config.T, ExactOracle(), ledger,
               workers=config.workers, reward_fn=env.reward_of)

    astar, rstar = optimal_action(env)
    reference = algo.regret_alpha * rstar
    rng = np.random.default_rng([config.env_seed, seed])
    cadence = config.cadence()

    record = RunRecord(
        run_id=_run_id(config, seed), algo=algo.label, env=config.env,
        d=config.d, m=config.m, T=config.T, seed=seed, checkpoints=[],
        astar=list(astar.arms), rstar=rstar, regret_alpha=algo.regret_alpha,
    )
    gap_cache: dict[tuple[int, ...], float] = {}
    cum_regret = 0.0
    last_adaptivity = 0
    t0 = time.perf_counter()

    try:
        for t in range(1, config.T + 1):
            action = algo.select(t)
            y = env.sample(rng)
            obs = Observation(t, action, {i: float(y[i]) for i in action.arms})
            algo.observe(obs)

            gap = gap_cache.get(action.arms)
            if gap is None:
                gap = reference - env.expected_reward(action)
                gap_cache[action.arms] = gap
            cum_regret += gap

            batched = ledger.adaptivity_rounds != last_adaptivity
            if batched or t % cadence == 0 or t == config.T:
                last_adaptivity = ledger.adaptivity_rounds
                record.checkpoints.append(Checkpoint(
                    t=t, cum_regret=cum_regret,
                    cum_adaptivity=ledger.adaptivity_rounds,
                    cum_queries=ledger.total_queries,
                    elapsed_ms=(time.perf_counter() - t0) * 1000.0,
                ))
    except Exception as exc:  # record the partial trajectory with the failure
        record.error = f"{type(exc).__name__}: {exc}"
        if not record.checkpoints:
            record.checkpoints.append(Checkpoint(0, cum_regret, ledger.adaptivity_rounds,
                                                 ledger.total_queries, 0.0))

    record.extras = _trial_extras(algo, env)
    return record


def _trial_extras(algo, env) -> dict:
    extras: dict = {"params": algo.get_params(), "regret_alpha": algo.regret_alpha}
    grid = getattr(algo, "grid", None)
    if grid is not None:
        extras["grid_boundaries"] = list(grid.boundaries)
        extras["grid_eta"] = grid.eta
    if hasattr(algo, "W"):
        extras["warmup_rounds"] = algo.W
        extras["warmup_capped"] = algo.warmup_capped
    if hasattr(algo, "epoch_log"):
        extras["epoch_log"] = algo.epoch_log
    if env.kind == "cov":
        extras["sigma_profile"] = sigma_profile(env)
    return extras


@dataclass
class SweepResult:
    config: RunConfig
    records: list[RunRecord]

    @property
    def n_failures(self) -> int:
        return sum(1 for r in self.records if r.error is not None)

    def aggregate(self) -> list[dict]:
        """Mean/std of the tracked series per uniform-cadence checkpoint."""
        ok = [r for r in self.records if r.error is None]
        if not ok:
            return []
        cadence = self.config.cadence()
        ticks = sorted({c.t for r in ok for c in r.checkpoints
                        if c.t % cadence == 0 or c.t == self.config.T})
        out = []
        for t in ticks:
            per_seed = []
            for r in ok:
                rows = [c for c in r.checkpoints if c.t == t]
                if rows:
                    per_seed.append(rows[-1])
            if len(per_seed) != len(ok):
                continue
            regrets = np.array([c.cum_regret for c in per_seed])
            out.append({
                "t": t,
                "regret_mean": float(regrets.mean()),
                "regret_std": float(regrets.std()),
                "adaptivity_mean": float(np.mean([c.cum_adaptivity for c in per_seed])),
                "queries_mean": float(np.mean([c.cum_queries for c in per_seed])),
                "elapsed_ms_mean": float(np.mean([c.elapsed_ms for c in per_seed])),
            })
        return out


def run_sweep(config: RunConfig) -> SweepResult:
    """Independent trials over the configured seeds; order-independent results."""
    config.validate()
    if config.workers > 1 and len(config.seeds) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(lambda s: run_trial(config, s), config.seeds))
    else:
        records = [run_trial(config, s) for s in config.seeds]
    return SweepResult(config=config, records=records)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_results(records: list[RunRecord], csv_path) -> None:
    path = Path(csv_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            for c in r.checkpoints:
                writer.writerow([
                    r.run_id, r.algo, r.env, r.d, r.m, r.T, r.seed,
                    c.t, _fmt(c.cum_regret), c.cum_adaptivity, c.cum_queries,
                    _fmt(c.elapsed_ms),
                ])


class ResultFormatError(ValueError):
    pass


def read_results(csv_path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_COLUMNS):
            raise ResultFormatError(f"unexpected CSV header {header}")
        rows = []
        for raw in reader:
            if len(raw) != len(CSV_COLUMNS):
                raise ResultFormatError(f"malformed row: {raw}")
            rows.append({
                "run_id": raw[0], "algo": raw[1], "env": raw[2],
                "d": int(raw[3]), "m": int(raw[4]), "T": int(raw[5]),
                "seed": int(raw[6]), "t": int(raw[7]),
                "cum_regret": float(raw[8]), "cum_adaptivity": int(raw[9]),
                "cum_queries": int(raw[10]), "elapsed_ms": float(raw[11]),
            })
    return rows


def write_metadata(sweep: SweepResult, json_path) -> None:
    path = Path(json_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    first_ok = next((r for r in sweep.records if r.error is None), None)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config": sweep.config.to_json_dict(),
        "n_failures": sweep.n_failures,
        "trials": [
            {
                "run_id": r.run_id, "seed": r.seed, "error": r.error,
                "final_t": r.final.t, "final_regret": r.final.cum_regret,
                "final_adaptivity": r.final.cum_adaptivity,
                "final_queries": r.final.cum_queries,
                "wall_ms": r.final.elapsed_ms,
            }
            for r in sweep.records
        ],
    }
    if first_ok is not None:
        meta["astar"] = first_ok.astar
        meta["rstar"] = first_ok.rstar
        meta["regret_alpha"] = first_ok.regret_alpha
        extras = dict(first_ok.extras)
        extras.pop("epoch_log", None)  # per-trial detail, too bulky for sweep metadata
        meta.update(extras)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_metadata(json_path) -> dict:
    with open(json_path) as fh:
        meta = json.load(fh)
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise ResultFormatError(
            f"schema_version {meta.get('schema_version')} != {SCHEMA_VERSION}"
        )
    return meta


def default_grid_M(T: int) -> int:
    return default_M(T)
