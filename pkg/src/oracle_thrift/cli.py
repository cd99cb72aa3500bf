"""Command-line entry point.

Subcommands: run (single trial), sweep (many seeds), reproduce (figure
presets at desk scale), list-algos.  Exit codes: 0 success, 1 configuration
error, 2 runtime error.  The default output root is $ORACLE_THRIFT_OUT, or
./results when unset.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .registry import ConfigError, describe_algorithms, ALGORITHM_NAMES
from .runner import RunConfig, run_sweep, write_metadata, write_results
from .schedule import default_M

ENV_KINDS = ("linear", "cov", "general")
FIGURES = ("fig2", "fig3", "fig4")

# presets pin every hyperparameter so one command reproduces a figure's data
_FIGURE_PRESETS = {
    "fig2": {
        "env": "linear", "d": 20, "m": 3, "T": 100_000,
        "algos": [("cucb", {}), ("aroq", {}), ("sroq", {})],
    },
    "fig3": {
        "env": "cov", "d": 10, "m": 3, "T": 100_000,
        "algos": [("aroq-c", {"update_every_round": True}), ("aroq-c", {}), ("sroq-c", {})],
    },
    "fig4": {
        "env": "general", "d": 5, "m": 2, "T": 100_000,
        "algos": [("aroq-gr", {"update_every_round": True}), ("aroq-gr", {}), ("sroq-gr", {})],
    },
}
_PRESET_SEEDS = tuple(range(1, 21))
_PRESET_ENV_SEED = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # config errors exit 1, not argparse's default 2
        raise ConfigError(message)


def _out_root(value: str | None) -> Path:
    if value:
        return Path(value)
    return Path(os.environ.get("ORACLE_THRIFT_OUT", "results"))


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", default="cucb", choices=ALGORITHM_NAMES)
    p.add_argument("--env", default="linear", choices=ENV_KINDS)
    p.add_argument("--T", type=int, default=10_000)
    p.add_argument("--d", type=int, default=None, help="base arms (default per env)")
    p.add_argument("--m", type=int, default=None, help="max activated arms (default per env)")
    p.add_argument("--env-seed", type=int, default=1)
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--checkpoint-every", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--C", type=float, default=None, help="confidence constant")
    p.add_argument("--M", type=int, default=None, help="epoch count for scheduled variants")
    p.add_argument("--alpha", type=float, default=None, help="approximation factor (alpha-aroq)")
    p.add_argument("--c-h", type=float, default=None, help="covariance radius constant")
    p.add_argument("--c-f", type=float, default=None, help="ellipsoid width constant")
    p.add_argument("--warmup-cap", type=int, default=None)
    p.add_argument("--discretize", action="store_true", default=False)
    p.add_argument("--update-every-round", action="store_true", default=False)


_ENV_DEFAULTS = {"linear": (20, 3), "cov": (10, 3), "general": (5, 2)}


def _params_from_args(args) -> dict:
    params = {
        "C": args.C, "M": args.M, "alpha": args.alpha,
        "c_h": args.c_h, "c_f": args.c_f, "warmup_cap": args.warmup_cap,
    }
    if args.discretize:
        params["discretize"] = True
    if args.update_every_round:
        params["update_every_round"] = True
    return {k: v for k, v in params.items() if v is not None}


def _config_from_args(args, seeds: tuple[int, ...]) -> RunConfig:
    d_default, m_default = _ENV_DEFAULTS[args.env]
    config = RunConfig(
        algo=args.algo, env=args.env,
        d=args.d if args.d is not None else d_default,
        m=args.m if args.m is not None else m_default,
        T=args.T, seeds=seeds, env_seed=args.env_seed,
        checkpoint_every=args.checkpoint_every, workers=args.workers,
        params=_params_from_args(args),
    )
    config.validate()
    return config


def _write_sweep(sweep, out_dir: Path, stem: str) -> tuple[Path, Path]:
    csv_path = out_dir / f"{stem}.csv"
    meta_path = out_dir / f"{stem}.meta.json"
    write_results(sweep.records, csv_path)
    write_metadata(sweep, meta_path)
    return csv_path, meta_path


def cmd_run(args) -> int:
    config = _config_from_args(args, seeds=(args.seed,))
    sweep = run_sweep(config)
    out = _out_root(args.out)
    stem = f"{config.algo}-{config.env}-T{config.T}-seed{args.seed}"
    csv_path, meta_path = _write_sweep(sweep, out, stem)
    print(f"wrote {csv_path}")
    print(f"wrote {meta_path}")
    if sweep.n_failures:
        print(f"error: {sweep.records[0].error}", file=sys.stderr)
        return 2
    return 0


def cmd_sweep(args) -> int:
    seeds = tuple(range(args.first_seed, args.first_seed + args.seeds))
    config = _config_from_args(args, seeds=seeds)
    sweep = run_sweep(config)
    out = _out_root(args.out)
    stem = f"{config.algo}-{config.env}-T{config.T}-seeds{args.seeds}"
    csv_path, meta_path = _write_sweep(sweep, out, stem)
    print(f"wrote {csv_path}")
    print(f"wrote {meta_path}")
    if sweep.n_failures:
        print(f"warning: {sweep.n_failures} of {len(seeds)} trials failed", file=sys.stderr)
        return 2
    return 0


def cmd_reproduce(args) -> int:
    preset = _FIGURE_PRESETS[args.figure]
    if not (0.0 < args.scale <= 1.0):
        raise ConfigError("--scale must lie in (0, 1]")
    T = max(1000, round(preset["T"] * args.scale))
    out = _out_root(args.out) / args.figure
    rc = 0
    for algo, extra in preset["algos"]:
        params = dict(extra)
        if algo in ("sroq", "sroq-c", "sroq-gr"):
            params["M"] = default_M(T)
        if algo in ("cucb", "aroq", "sroq", "aroq-gr", "sroq-gr"):
            params.setdefault("C", 1.5)
        if algo in ("aroq-c", "sroq-c"):
            params.setdefault("c_h", 1.0)
            params.setdefault("c_f", 1.0)
        config = RunConfig(
            algo=algo, env=preset["env"], d=preset["d"], m=preset["m"], T=T,
            seeds=_PRESET_SEEDS, env_seed=_PRESET_ENV_SEED,
            workers=args.workers, params=params,
        )
        config.validate()
        sweep = run_sweep(config)
        label = sweep.records[0].algo
        csv_path, meta_path = _write_sweep(sweep, out, label)
        print(f"wrote {csv_path}")
        print(f"wrote {meta_path}")
        if sweep.n_failures:
            print(f"warning: {sweep.n_failures} trials failed for {label}", file=sys.stderr)
            rc = 2
    return rc


def cmd_list_algos(_args) -> int:
    for name, desc in describe_algorithms():
        print(f"{name:12s} {desc}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oracle-thrift",
                     description="Combinatorial semi-bandits with rare oracle queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single seeded trial", parents=[])
    _add_common_flags(p_run)
    p_run.add_argument("--seed", type=int, default=1)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="independent trials over many seeds")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--seeds", type=int, default=20, help="number of trial seeds")
    p_sweep.add_argument("--first-seed", type=int, default=1)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="run a figure preset")
    p_rep.add_argument("figure", choices=FIGURES)
    p_rep.add_argument("--scale", type=float, default=1.0,
                       help="multiplies the full-scale horizon T=1e5")
    p_rep.add_argument("--out", type=str, default=None)
    p_rep.add_argument("--workers", type=int, default=1)
    p_rep.set_defaults(fn=cmd_reproduce)

    p_list = sub.add_parser("list-algos", help="list algorithm identifiers")
    p_list.set_defaults(fn=cmd_list_algos)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except ValueError as exc:  # ConfigError and invalid-parameter failures
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (KeyboardInterrupt, BrokenPipeError):
        return 2
    except Exception as exc:  # runtime failures
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
