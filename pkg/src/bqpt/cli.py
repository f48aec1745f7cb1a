"""Command-line interface.

Subcommands: ``run`` (one elementary test), ``sweep`` (error criteria vs. K at
fixed budget, CSV/JSON output), ``goldens`` (derived parameter and matrix
values for the configured process) and ``selftest`` (oracle battery).

Settings resolve in order: built-in defaults, then the --config file, then the
BQPT_OUTPUT_DIR environment variable, then explicit flags.  Exit codes:
0 success, 1 configuration error, 2 estimation failure rate above threshold
(or a failed selftest).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import selftest as selftest_mod
from .harness import (
    CONFIG_PARSERS,
    ConfigError,
    ExperimentConfig,
    config_from_mapping,
    parse_config_file,
    run_elementary_test,
    run_sweep,
    truth_for,
    write_full_json,
    write_sweep_csvs,
)
from .physics import build_evolution_matrix, mixing_parameters

OUTPUT_DIR_ENV = "BQPT_OUTPUT_DIR"

# Config fields exposed 1:1 as flags (--with-dashes).
_FLAG_FIELDS = [name for name in CONFIG_PARSERS]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for name in _FLAG_FIELDS:
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bqpt",
        description="Blind identification of a two-qubit coupling process "
        "from simulated spin-component measurement statistics.",
    )
    parser.add_argument("--config", help="key = value configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one elementary test")
    _add_config_flags(run_p)
    run_p.add_argument("--seed", type=int, default=None, help="test seed (default: master_seed)")
    run_p.add_argument("--json", action="store_true", help="emit the result as JSON")

    sweep_p = sub.add_parser("sweep", help="error criteria vs. K at fixed N*K budget")
    _add_config_flags(sweep_p)
    sweep_p.add_argument("--full", action="store_true", help="also write per-repetition JSON")
    sweep_p.add_argument(
        "--no-timing",
        action="store_true",
        help="write zero wall times so outputs are byte-reproducible",
    )

    gold_p = sub.add_parser("goldens", help="print derived v, w1, w2 and M for the config")
    _add_config_flags(gold_p)

    sub.add_parser("selftest", help="run the oracle battery")
    return parser


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        cfg = config_from_mapping(parse_config_file(args.config), cfg)
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        cfg = config_from_mapping({"output_dir": env_dir}, cfg)
    overrides = {
        name: getattr(args, name)
        for name in _FLAG_FIELDS
        if getattr(args, name, None) is not None
    }
    if getattr(args, "full", False):
        overrides["full_records"] = "true"
    if getattr(args, "no_timing", False):
        overrides["record_timing"] = "false"
    cfg = config_from_mapping(overrides, cfg)
    cfg.validate()
    return cfg


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    seed = args.seed if args.seed is not None else cfg.master_seed
    result = run_elementary_test(cfg, seed)
    truth = truth_for(cfg)
    if args.json:
        payload = asdict(result) | {
            "clamp_flags": list(result.clamp_flags),
            "truth": {"v": truth.v, "w1": truth.w1, "w2": truth.w2},
        }
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(f"seed          : {seed}")
        print(f"preparations  : {result.preparations}")
        if result.error:
            print(f"error         : {result.error}")
        else:
            print(f"v_hat         : {result.v_hat:+.6f}   (actual {truth.v:+.6f})")
            print(f"w1_hat        : {result.w1_hat:+.6f}   (actual {truth.w1:+.6f})")
            print(f"w2_hat        : {result.w2_hat:+.6f}   (actual {truth.w2:+.6f})")
            print(f"m_rel_error   : {result.m_rel_error:.6%}")
            print(f"clamp_flags   : {', '.join(result.clamp_flags) or 'none'}")
        if cfg.record_timing:
            print(f"wall_seconds  : {result.wall_seconds:.3f}")
    return 2 if result.error else 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    result = run_sweep(cfg)
    paths = write_sweep_csvs(result, cfg.output_dir)
    if cfg.full_records:
        paths.append(write_full_json(result, cfg.output_dir))
    print(f"# master_seed: {cfg.master_seed}")
    for point in result.points:
        line = f"K={point.k:<6d} N={point.n:<8d}"
        for name in ("nrmse_v", "nrmse_w1", "nrmse_w2", "m_rel_error"):
            line += f" {name}={point.criteria[name][0]:.4g}"
        if point.excluded:
            line += f" excluded={point.excluded}"
        print(line)
    for path in paths:
        print(f"wrote {path}")
    if result.failure_rate > cfg.failure_threshold:
        print(
            f"estimation failure rate {result.failure_rate:.1%} exceeds "
            f"threshold {cfg.failure_threshold:.1%}",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_goldens(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    params = cfg.process_params()
    times = cfg.protocol_times()
    mix1 = mixing_parameters(params, times.tau1)
    mix2 = mixing_parameters(params, times.tau2)
    print(f"# master_seed: {cfg.master_seed}")
    print(f"tau1 = {times.tau1:.6e} s, tau2 = {times.tau2:.6e} s, tau3 = {times.tau3:.6e} s")
    print(f"v  (tau1) = {mix1.v:+.15f}")
    print(f"w1 (tau2) = {mix2.w1:+.15f}")
    print(f"w2 (tau2) = {mix2.w2:+.15f}")
    m = build_evolution_matrix(params, times.tau3)
    with np.printoptions(precision=12, suppress=False, linewidth=120):
        print("M (tau3) =")
        print(m)
    return 0


def _cmd_selftest() -> int:
    checks = selftest_mod.run_all()
    failed = 0
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failed += not ok
    return 2 if failed else 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "goldens":
            return _cmd_goldens(args)
        return _cmd_selftest()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
