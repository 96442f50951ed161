"""Shared driver for the experiment scripts in this directory."""

import argparse
import time
from pathlib import Path

from mpjacobi.harness import PRESETS, emit, run_grid
from mpjacobi.matgen import DEFAULT_SEED


def parse_args(preset: str, default_n: int, description: str):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--n", type=int, default=default_n, help="problem size (rows for rectangular grids)")
    p.add_argument("--seed-base", type=int, default=DEFAULT_SEED)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", type=Path, default=Path("results"), help="where CSV, JSON and markdown go")
    args = p.parse_args()
    args.preset = preset
    return args


def run_preset(args):
    """Run the preset grid, write ``<preset>_n<N>.{csv,json,md}`` and return the rows."""
    grid = PRESETS[args.preset](args.n, args.seed_base)
    start = time.perf_counter()
    rows = run_grid(grid, jobs=args.jobs)
    elapsed = time.perf_counter() - start
    args.out_dir.mkdir(parents=True, exist_ok=True)
    stem = args.out_dir / f"{args.preset}_n{args.n}"
    emit(rows, "csv", stem.with_suffix(".csv"))
    emit(rows, "json", stem.with_suffix(".json"))
    emit(rows, "markdown", stem.with_suffix(".md"))
    print(f"{len(rows)} cells in {elapsed:.1f}s; results in {stem}.{{csv,json,md}}")
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"  failed: {r.spec.to_string()} {r.algorithm.value}: {r.error}")
    return rows
