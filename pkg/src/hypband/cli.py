"""Command-line interface: one subcommand per experiment plus `fit`.

Exit status: 0 when every fit and flag passes, 2 on a failed tolerance,
1 on an execution error.
"""

import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .harness import EXPERIMENTS, ExperimentConfig, parse_config, refit_csv, \
    run_experiment, write_outputs


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hypband",
        description="Spectral-projector kernel and scaling-law experiments "
                    "on the hyperbolic plane and its quotients.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", type=Path, help="key = value config file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--overwrite", action="store_true")
    fit = sub.add_parser("fit", help="refit a slope from a persisted CSV")
    fit.add_argument("csv", type=Path)
    fit.add_argument("--scale-col", default="lambda")
    fit.add_argument("--value-col", default="ratio")
    return parser


def _load_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = parse_config(Path(args.config).read_text())
        if cfg.experiment != args.command:
            raise ConfigError(
                f"config is for {cfg.experiment!r} but subcommand is {args.command!r}")
    else:
        cfg = parse_config(f"experiment = {args.command}\n")
    if args.out is not None:
        cfg.out_dir = args.out
    if args.threads is not None:
        cfg.threads = args.threads
    if args.seed is not None:
        cfg.seed = args.seed
    if args.overwrite:
        cfg.overwrite = True
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "fit":
        try:
            fit = refit_csv(args.csv, args.scale_col, args.value_col)
        except Exception as exc:  # noqa: BLE001
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"slope = {fit.slope!r}")
        print(f"intercept = {fit.intercept!r}")
        print(f"r_squared = {fit.r_squared!r}")
        return 0
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    summary = run_experiment(cfg)
    try:
        paths = write_outputs(summary, cfg.out_dir, overwrite=cfg.overwrite)
    except FileExistsError as exc:
        print(f"refusing to overwrite: {exc}", file=sys.stderr)
        return 1
    for f in summary.fits:
        status = "pass" if f.passed else "FAIL"
        print(f"[{status}] {f.name}: slope={f.slope:.4f} target={f.target:.4f} "
              f"tol={f.tolerance:.4f}")
    for name, ok in sorted(summary.flags.items()):
        print(f"[{'pass' if ok else 'FAIL'}] {name}")
    for p in paths:
        print(f"wrote {p}")
    if "execution_error" in summary.flags:
        return 1
    return 0 if summary.all_passed else 2


if __name__ == "__main__":
    sys.exit(main())
