#!/usr/bin/env python3
"""Run all three methods at full scale and print the ratio table.

    python scripts/full_scale.py --out runs/full [--config configs/full.toml]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from semcom.config import METHODS, ExperimentConfig, parse_config
from semcom.harness import compare_dirs, run_experiment


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("runs/full"))
    ap.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    args = ap.parse_args()

    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    dirs = []
    for method in args.methods:
        d = args.out / method
        run_experiment(cfg.with_method(method), d, progress=lambda m: print(m, file=sys.stderr))
        dirs.append(d)
    table = compare_dirs(dirs, args.out / "compare.json")
    print(json.dumps(table["ratios"], indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
