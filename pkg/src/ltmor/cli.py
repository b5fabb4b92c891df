"""Command-line entry point: ``ltmor {run,offline,online,reference,study}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

import numpy as np

from . import experiment
from .config import ConfigError, load_config, profile_text

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2

log = logging.getLogger("ltmor")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", help="path to a sectioned key=value config file")
    src.add_argument("--profile", help="bundled profile name (desk or full)")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--workers", type=int, help="threads for snapshot solves (overrides run.workers)")
    common.add_argument("--seed", type=int, help="seed for randomized diagnostics (overrides run.seed)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="ltmor", description="Laplace-domain reduced basis for the wave equation")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="offline + online + reference, all reports")
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--offline-only", action="store_true", help="stop after building the basis")
    mode.add_argument("--online-only", action="store_true", help="reuse a basis from --basis")
    run.add_argument("--basis", help="basis file written by an offline run")
    sub.add_parser("offline", parents=[common], help="snapshots, POD and reduced operators")
    online = sub.add_parser("online", parents=[common], help="reduced time stepping from a stored basis")
    online.add_argument("--basis", help="basis file written by an offline run")
    sub.add_parser("reference", parents=[common], help="high-fidelity time stepping only")
    sub.add_parser("study", parents=[common], help="error table over the (M, R) grid")
    return p


def resolve_config(args):
    if args.config:
        cfg = load_config(args.config)
    elif args.profile:
        cfg = load_config(text=profile_text(args.profile))
    else:
        raise ConfigError("one of --config or --profile is required")
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.out:
        updates["out_dir"] = args.out
    return dataclasses.replace(cfg, **updates).validate() if updates else cfg


def dispatch(args, cfg) -> None:
    out = cfg.out_dir
    cmd = args.command
    if cmd == "run":
        if args.online_only and not args.basis:
            log.info("no --basis given; using %s in the output directory", experiment.BASIS_FILE)
        res = experiment.run_all(cfg, out, offline_only=args.offline_only,
                                 online_only=args.online_only, basis_path=args.basis)
    elif cmd == "offline":
        res = experiment.run_all(cfg, out, offline_only=True)
    elif cmd == "online":
        res = experiment.run_all(cfg, out, online_only=True, basis_path=args.basis)
    elif cmd == "reference":
        experiment.run_reference_only(cfg, out)
        return
    else:
        for rep in experiment.run_study(cfg, out):
            log.info("M=%d: H1 errors %s", rep.M, ", ".join(f"{e:.2e}" for e in rep.rel_error_H1))
        return
    if "report" in res:
        rep = res["report"]
        for R, e2, e1 in zip(rep.R_values, rep.rel_error_L2, rep.rel_error_H1):
            log.info("R=%3d  L2 %.3e  H1 %.3e", R, e2, e1)
    t = res["timing"]
    log.info("RB pipeline %.2fs, high-fidelity %.2fs", t.rb_total, t.hf_total)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        dispatch(args, cfg)
    except ConfigError as exc:
        print(f"ltmor: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"ltmor: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"ltmor: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
