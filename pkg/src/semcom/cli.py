"""Command line entry point: ``semcom gen-scenario | run | compare``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import METHODS, ExperimentConfig, parse_config
from .errors import SemcomError
from .harness import compare_dirs, run_experiment
from .scenario import generate_scenario

EXIT_IO = 60


def _load(path) -> ExperimentConfig:
    return parse_config(path) if path else ExperimentConfig()


def _cmd_gen(args, say) -> int:
    cfg = _load(args.config)
    scenario = generate_scenario(cfg.scenario, args.seed)
    scenario.save(args.out)
    say(f"wrote scenario ({scenario.n_events} events, {len(scenario.tasks)} tasks) to {args.out}")
    return 0


def _cmd_run(args, say) -> int:
    cfg = _load(args.config)
    if args.method:
        cfg = cfg.with_method(args.method)
    return run_experiment(cfg, args.out, progress=say)


def _cmd_compare(args, say) -> int:
    table = compare_dirs(args.inputs, args.out)
    for k, v in table["ratios"].items():
        say(f"{k} = {v:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semcom", description=__doc__)
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-scenario", help="generate and save a scenario world")
    g.add_argument("--config", type=Path)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", type=Path, required=True)
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="train one method over the configured seeds")
    r.add_argument("--config", type=Path)
    r.add_argument("--method", choices=METHODS)
    r.add_argument("--out", type=Path, required=True)
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("compare", help="ratio table across run directories")
    c.add_argument("--inputs", type=Path, nargs="+", required=True)
    c.add_argument("--out", type=Path, required=True)
    c.set_defaults(func=_cmd_compare)

    for sp in (g, r, c):
        sp.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    quiet = getattr(args, "quiet", False)

    def say(msg: str) -> None:
        if not quiet:
            print(msg, file=sys.stderr, flush=True)

    try:
        return args.func(args, say)
    except SemcomError as exc:
        print(f"semcom: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"semcom: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
