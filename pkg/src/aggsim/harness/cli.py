"""Command line entry point: ``python -m aggsim <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..errors import ConfigurationError
from . import experiments
from .config import RunConfig, load_config, preset_config
from .loop import run

log = logging.getLogger("aggsim")

# subcommand -> preset providing the defaults
PRESET_FOR = {
    "run": None,
    "resume": None,
    "taylor-green": "taylor_green",
    "spinodal": "spinodal",
    "galerkin-study": "smooth",
    "perturb": "bubble",
    "convergence-dt": "smooth",
}


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS defaults let the flags appear before or after the subcommand
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS,
                       help="key = value config file")
    flags.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS, help="output directory")
    flags.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="initial-condition seed")
    flags.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                       help="only log warnings and errors")
    flags.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                       help="worker processes for experiment sweeps")
    return flags


def build_parser() -> argparse.ArgumentParser:
    flags = _global_flags()
    parser = argparse.ArgumentParser(prog="aggsim", parents=[flags],
                                     description="Spectral NSCH solver and experiment harness.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[flags], help="run a configured simulation")
    p = sub.add_parser("resume", parents=[flags], help="continue a run from a checkpoint")
    p.add_argument("checkpoint", help="checkpoint file written by a previous run")
    sub.add_parser("taylor-green", parents=[flags], help="matched-density vortex decay")
    sub.add_parser("spinodal", parents=[flags], help="spinodal decomposition run")
    sub.add_parser("galerkin-study", parents=[flags], help="Galerkin truncation convergence")
    p = sub.add_parser("perturb", parents=[flags], help="continuous dependence on the data")
    p.add_argument("--eps", type=float, nargs="+", default=[1e-6, 2e-6, 4e-6])
    p = sub.add_parser("convergence-dt", parents=[flags], help="time-step refinement study")
    p.add_argument("--levels", type=int, default=3)
    return parser


def resolve_config(args) -> RunConfig:
    preset = PRESET_FOR[args.command]
    base = preset_config(preset) if preset else RunConfig()
    config_path = getattr(args, "config", None)
    if config_path is not None:
        cfg = load_config(config_path, base)
    elif args.command in ("run", "resume"):
        raise ConfigurationError(f"'{args.command}' needs --config PATH")
    else:
        cfg = base
    if hasattr(args, "seed"):
        cfg = replace(cfg, ic=replace(cfg.ic, seed=args.seed))
    if hasattr(args, "out"):
        cfg = replace(cfg, output=replace(cfg.output, dir=args.out))
    return cfg


def _summary(label: str, rows) -> None:
    print(label)
    for row in rows:
        print("  " + "  ".join(str(x) for x in row))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if getattr(args, "quiet", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
    except (ConfigurationError, OSError) as exc:
        print(f"aggsim: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.output.dir)
    workers = getattr(args, "workers", 1)

    try:
        if args.command in ("run", "spinodal"):
            return run(cfg)
        if args.command == "resume":
            return run(cfg, resume_from=args.checkpoint)
        if args.command == "taylor-green":
            r = experiments.experiment_taylor_green(cfg, out)
            _summary("taylor-green", [("fitted_rate", r.fitted_rate), ("expected_rate", r.expected_rate),
                                      ("relative_error", r.relative_error)])
        elif args.command == "galerkin-study":
            r = experiments.experiment_galerkin(cfg, out_dir=out, workers=workers)
            _summary("galerkin-study (m, eigenvalue, max L2 error)",
                     zip(r.cutoffs, r.eigenvalues, r.errors))
        elif args.command == "perturb":
            r = experiments.experiment_perturb(cfg, args.eps, out_dir=out, workers=workers)
            _summary(f"perturb (rate {r.rate:.6g}, constant {r.constant:.6g})",
                     zip(r.epsilons, r.final_metrics))
        elif args.command == "convergence-dt":
            r = experiments.experiment_convergence_dt(cfg, args.levels, out_dir=out, workers=workers)
            _summary("convergence-dt (dt, difference)", zip(r.dts, r.differences))
            print("  orders", r.orders)
    except ConfigurationError as exc:
        print(f"aggsim: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
