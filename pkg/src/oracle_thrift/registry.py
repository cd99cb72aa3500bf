"""Algorithm catalog: names, factories, and algorithm/environment compatibility."""

from __future__ import annotations

from .algo_cov import AroqCCmab, SroqCCmab
from .algo_general import AroqGrCmab, SroqGrCmab
from .algo_linear import AroqCmab, SroqCmab
from .base import BanditAlgorithm


class ConfigError(ValueError):
    """A run configuration is invalid; reported before any trial starts."""


# algorithm name -> (factory, accepted hyperparameters, compatible env kinds)
_CATALOG: dict[str, tuple] = {
    "cucb": (
        lambda p: AroqCmab(C=p.get("C", 1.5), update_every_round=True, label="cucb"),
        {"C"},
        {"linear", "cov"},
    ),
    "aroq": (
        lambda p: AroqCmab(C=p.get("C", 1.5),
                           update_every_round=p.get("update_every_round", False)),
        {"C", "update_every_round"},
        {"linear", "cov"},
    ),
    "sroq": (
        lambda p: SroqCmab(C=p.get("C", 1.5), M=p.get("M")),
        {"C", "M"},
        {"linear", "cov"},
    ),
    "alpha-aroq": (
        lambda p: AroqCmab(C=p.get("C", 1.5), alpha=p.get("alpha", 1.0),
                           alpha_sample=p.get("alpha_sample", 64), label="alpha-aroq"),
        {"C", "alpha", "alpha_sample"},
        {"linear", "cov"},
    ),
    "aroq-c": (
        lambda p: AroqCCmab(c_h=p.get("c_h", 1.0), c_f=p.get("c_f", 1.0),
                            warmup_cap=p.get("warmup_cap"),
                            update_every_round=p.get("update_every_round", False)),
        {"c_h", "c_f", "warmup_cap", "update_every_round"},
        {"linear", "cov"},
    ),
    "sroq-c": (
        lambda p: SroqCCmab(c_h=p.get("c_h", 1.0), c_f=p.get("c_f", 1.0), M=p.get("M"),
                            phase2_clamp=p.get("phase2_clamp", True)),
        {"c_h", "c_f", "M", "phase2_clamp"},
        {"linear", "cov"},
    ),
    "aroq-gr": (
        lambda p: AroqGrCmab(C=p.get("C", 1.5),
                             update_every_round=p.get("update_every_round", False),
                             discretize=p.get("discretize", False),
                             disc_constant=p.get("disc_constant", 1.0),
                             joint_budget=p.get("joint_budget", 1_000_000)),
        {"C", "update_every_round", "discretize", "disc_constant", "joint_budget"},
        {"general", "linear"},
    ),
    "sroq-gr": (
        lambda p: SroqGrCmab(C=p.get("C", 1.5), M=p.get("M"),
                             discretize=p.get("discretize", False),
                             disc_constant=p.get("disc_constant", 1.0),
                             joint_budget=p.get("joint_budget", 1_000_000)),
        {"C", "M", "discretize", "disc_constant", "joint_budget"},
        {"general", "linear"},
    ),
}

ALGORITHM_NAMES = tuple(_CATALOG)

_ENV_REQUIREMENT_MSG = {
    ("aroq-c", "general"): "algorithm requires linear feedback",
    ("sroq-c", "general"): "algorithm requires linear feedback",
    ("cucb", "general"): "algorithm requires linear feedback",
    ("aroq", "general"): "algorithm requires linear feedback",
    ("sroq", "general"): "algorithm requires linear feedback",
    ("alpha-aroq", "general"): "algorithm requires linear feedback",
    ("aroq-gr", "cov"): "algorithm requires feedback bounded in [0, 1]",
    ("sroq-gr", "cov"): "algorithm requires feedback bounded in [0, 1]",
}


def validate_algo_env(algo: str, env_kind: str) -> None:
    if algo not in _CATALOG:
        raise ConfigError(f"unknown algorithm {algo!r}; choices: {', '.join(ALGORITHM_NAMES)}")
    if env_kind not in ("linear", "cov", "general"):
        raise ConfigError(f"unknown environment {env_kind!r}; choices: linear, cov, general")
    _, _, kinds = _CATALOG[algo]
    if env_kind not in kinds:
        msg = _ENV_REQUIREMENT_MSG.get((algo, env_kind), "incompatible algorithm/environment pair")
        raise ConfigError(f"{algo} cannot run on the {env_kind} environment: {msg}")


def make_algorithm(name: str, params: dict | None = None) -> BanditAlgorithm:
    params = dict(params or {})
    if name not in _CATALOG:
        raise ConfigError(f"unknown algorithm {name!r}; choices: {', '.join(ALGORITHM_NAMES)}")
    factory, accepted, _ = _CATALOG[name]
    supplied = {k for k, v in params.items() if v is not None}
    extras = supplied - accepted
    if extras:
        raise ConfigError(
            f"hyperparameters {sorted(extras)} do not apply to {name} "
            f"(accepted: {sorted(accepted)})"
        )
    return factory({k: v for k, v in params.items() if v is not None})


def describe_algorithms() -> list[tuple[str, str]]:
    descriptions = {
        "cucb": "per-round UCB baseline (oracle query every round)",
        "aroq": "adaptive rare oracle queries, linear rewards",
        "sroq": "scheduled rare oracle queries with arm elimination, linear rewards",
        "alpha-aroq": "adaptive rare queries through an alpha-approximation oracle",
        "aroq-c": "adaptive rare queries with covariance-adaptive confidence",
        "sroq-c": "scheduled rare queries with single and pair elimination",
        "aroq-gr": "adaptive rare queries for monotone non-linear rewards",
        "sroq-gr": "scheduled rare queries for monotone non-linear rewards",
    }
    return [(name, descriptions[name]) for name in ALGORITHM_NAMES]
