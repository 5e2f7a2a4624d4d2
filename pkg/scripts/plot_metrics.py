#!/usr/bin/env python3
"""Plot windowed episode length and transmission cost from metrics CSVs.

Reads only the CSV files written by ``semcom run``; one curve per run
directory, averaged over its seeds.

    python scripts/plot_metrics.py runs/cl runs/flat-rl --out curves.png
"""

from __future__ import annotations

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from semcom.metrics import read_csv, window_average  # noqa: E402


def curves(run_dir: Path, window: int, points: int):
    series = []
    for csv_path in sorted(run_dir.glob("metrics_seed*.csv")):
        records = read_csv(csv_path)
        series.append(window_average(records, window))
    if not series:
        raise SystemExit(f"no metrics_seed*.csv in {run_dir}")
    n = min(len(s["length"]) for s in series)
    idx = np.unique(np.linspace(0, n - 1, points).astype(int))
    out = {k: np.mean([s[k][:n] for s in series], axis=0)[idx] for k in ("length", "cost")}
    return idx + 1, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("runs", type=Path, nargs="+")
    ap.add_argument("--window", type=int, default=10_000)
    ap.add_argument("--points", type=int, default=400, help="samples per curve")
    ap.add_argument("--out", type=Path, default=Path("curves.png"))
    args = ap.parse_args()

    fig, (ax_len, ax_cost) = plt.subplots(1, 2, figsize=(11, 4))
    for run in args.runs:
        x, y = curves(run, args.window, args.points)
        ax_len.plot(x, y["length"], label=run.name)
        ax_cost.plot(x, y["cost"], label=run.name)
    ax_len.set(xlabel="episode", ylabel="episode length", title="execution time")
    ax_cost.set(xlabel="episode", ylabel="transmission cost", title="transmission cost")
    for ax in (ax_len, ax_cost):
        ax.grid(alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=130)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
