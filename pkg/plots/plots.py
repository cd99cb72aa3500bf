#!/usr/bin/env python3
"""Six-panel oracle-efficiency figures from sweep CSV/JSON outputs.

Reads only the documented result files (schema version 1): per-algorithm CSVs
with columns run_id, algo, env, d, m, T, seed, t, cum_regret, cum_adaptivity,
cum_queries, elapsed_ms, plus companion *.meta.json files.  Renders the
standard six-panel layout: (a) cumulative adaptivity, (b) cumulative
queries, and (c) regret as time series with a +/-1 std band across seeds,
plus (d) runtime, (e) total adaptivity, and (f) total queries as bars of
the final-row values.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "run_id", "algo", "env", "d", "m", "T", "seed",
    "t", "cum_regret", "cum_adaptivity", "cum_queries", "elapsed_ms",
)
FIGURES = ("fig2", "fig3", "fig4")


class InputError(Exception):
    pass


class SchemaError(InputError):
    pass


@dataclass
class AlgoSeries:
    """Across-seed summary of one algorithm's sweep."""

    label: str
    ticks: np.ndarray           # checkpoint rounds present for every seed
    regret_mean: np.ndarray
    regret_std: np.ndarray
    adaptivity_mean: np.ndarray
    adaptivity_std: np.ndarray
    queries_mean: np.ndarray
    queries_std: np.ndarray
    n_seeds: int
    total_adaptivity: float     # mean of final-row values
    total_queries: float
    total_runtime_ms: float
    runtime_std: float


def read_rows(csv_path: Path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_COLUMNS):
            raise SchemaError(f"{csv_path.name}: unexpected header {header}")
        rows = []
        for raw in reader:
            if len(raw) != len(CSV_COLUMNS):
                raise SchemaError(f"{csv_path.name}: malformed row {raw}")
            rows.append({
                "algo": raw[1], "seed": int(raw[6]), "t": int(raw[7]),
                "cum_regret": float(raw[8]), "cum_adaptivity": int(raw[9]),
                "cum_queries": int(raw[10]), "elapsed_ms": float(raw[11]),
            })
    if not rows:
        raise InputError(f"{csv_path.name}: no data rows")
    return rows


def check_metadata(csv_path: Path) -> None:
    meta_path = csv_path.with_suffix("").with_suffix(".meta.json") \
        if csv_path.name.endswith(".meta.json") else csv_path.with_name(csv_path.stem + ".meta.json")
    if not meta_path.exists():
        return  # metadata is advisory for rendering; the CSV carries the data
    with open(meta_path) as fh:
        meta = json.load(fh)
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"{meta_path.name}: schema_version {meta.get('schema_version')} != {SCHEMA_VERSION}"
        )


def summarize(rows: list[dict]) -> AlgoSeries:
    label = rows[0]["algo"]
    by_seed: dict[int, dict[int, dict]] = {}
    for row in rows:
        by_seed.setdefault(row["seed"], {})[row["t"]] = row  # last row per t wins
    seeds = sorted(by_seed)
    common = set(by_seed[seeds[0]])
    for s in seeds[1:]:
        common &= set(by_seed[s])
    ticks = np.array(sorted(common))
    if ticks.size == 0:
        raise InputError(f"{label}: seeds share no checkpoint rounds")

    def stack(field):
        return np.array([[by_seed[s][t][field] for t in ticks] for s in seeds], dtype=float)

    regret = stack("cum_regret")
    adapt = stack("cum_adaptivity")
    queries = stack("cum_queries")
    finals = [by_seed[s][max(by_seed[s])] for s in seeds]
    runtimes = np.array([f["elapsed_ms"] for f in finals])
    return AlgoSeries(
        label=label,
        ticks=ticks,
        regret_mean=regret.mean(axis=0), regret_std=regret.std(axis=0),
        adaptivity_mean=adapt.mean(axis=0), adaptivity_std=adapt.std(axis=0),
        queries_mean=queries.mean(axis=0), queries_std=queries.std(axis=0),
        n_seeds=len(seeds),
        total_adaptivity=float(np.mean([f["cum_adaptivity"] for f in finals])),
        total_queries=float(np.mean([f["cum_queries"] for f in finals])),
        total_runtime_ms=float(runtimes.mean()),
        runtime_std=float(runtimes.std()),
    )


def load_panel_data(in_dir: Path) -> list[AlgoSeries]:
    csv_paths = sorted(p for p in in_dir.glob("*.csv"))
    if not csv_paths:
        raise InputError(f"no CSV files in {in_dir}")
    series = []
    for p in csv_paths:
        check_metadata(p)
        series.append(summarize(read_rows(p)))
    return series


def render_figure(series: list[AlgoSeries], out_path: Path | None, title: str = "",
                  log_complexity: bool = True):
    colors = {s.label: f"C{i}" for i, s in enumerate(series)}
    fig, axes = plt.subplots(2, 3, figsize=(15, 8))
    (ax_a, ax_b, ax_c), (ax_d, ax_e, ax_f) = axes

    def band(ax, s, mean, std, step):
        kw = dict(color=colors[s.label], label=s.label)
        if step:
            ax.step(s.ticks, mean, where="post", **kw)
        else:
            ax.plot(s.ticks, mean, **kw)
        ax.fill_between(s.ticks, mean - std, mean + std,
                        step="post" if step else None,
                        color=colors[s.label], alpha=0.2, linewidth=0)

    for s in series:
        band(ax_a, s, s.adaptivity_mean, s.adaptivity_std, step=True)
        band(ax_b, s, s.queries_mean, s.queries_std, step=True)
        band(ax_c, s, s.regret_mean, s.regret_std, step=False)

    for ax, name in ((ax_a, "cumulative adaptivity"), (ax_b, "cumulative queries"),
                     (ax_c, "cumulative regret")):
        ax.set_xlabel("round t")
        ax.set_ylabel(name)
        ax.legend(fontsize=8)
    if log_complexity:
        ax_a.set_yscale("log")
        ax_b.set_yscale("log")

    labels = [s.label for s in series]
    bar_colors = [colors[l] for l in labels]
    ax_d.bar(labels, [s.total_runtime_ms for s in series],
             yerr=[s.runtime_std for s in series], color=bar_colors)
    ax_d.set_ylabel("runtime (ms)")
    ax_e.bar(labels, [s.total_adaptivity for s in series], color=bar_colors)
    ax_e.set_ylabel("total adaptivity")
    ax_f.bar(labels, [s.total_queries for s in series], color=bar_colors)
    ax_f.set_ylabel("total queries")
    for ax, tag in zip(axes.flat, "abcdef"):
        ax.set_title(f"({tag})", loc="left", fontsize=10)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    if out_path is not None:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out_path, dpi=150)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render six-panel oracle-efficiency figures from sweep outputs.")
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory holding the per-algorithm CSV/JSON outputs")
    parser.add_argument("--figure", choices=FIGURES, required=True)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--linear-complexity", action="store_true",
                        help="use linear instead of log y-scale on complexity panels")
    args = parser.parse_args(argv)

    try:
        series = load_panel_data(Path(args.in_dir))
        fig = render_figure(series, Path(args.out), title=args.figure,
                            log_complexity=not args.linear_complexity)
        plt.close(fig)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
