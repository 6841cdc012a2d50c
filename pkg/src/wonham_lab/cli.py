"""Command line entry point: ``wonham-lab <experiment> --config PATH --out DIR``."""
import argparse
import logging
import os
import sys
from pathlib import Path

from .config import EXPERIMENTS, parse_config
from .exceptions import ConfigError, NonErgodicError
from .experiments import run_experiment

log = logging.getLogger("wonham_lab")

# Files echoed to stdout after a run, per experiment.
_ECHO = {"gamma-quad": "quadrature.csv", "bounds": "bounds.csv", "couple": "coupling_fit.csv",
         "ergodic-avg": "ergodic.csv", "snr-sweep": "sweep.csv", "gamma-mc": "estimates.csv",
         "lyapunov": "estimates.csv"}


def build_parser():
    parser = argparse.ArgumentParser(prog="wonham-lab", description=__doc__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        text = args.config.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text)
        if args.seed is not None:
            config.master_seed = args.seed
            config.source["seed"] = str(args.seed)
        out = args.out or Path(f"out-{args.experiment}")
        config.outputs = str(out)
        status = run_experiment(config, out, args.experiment, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NonErgodicError as exc:
        print(f"non-ergodic model: {exc}", file=sys.stderr)
        return 2
    echo = _ECHO.get(args.experiment)
    if echo:
        sys.stdout.write((out / echo).read_text())
    return status


if __name__ == "__main__":
    sys.exit(main())
