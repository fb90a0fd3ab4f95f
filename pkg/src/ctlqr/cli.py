"""Command-line interface.

Subcommands:
  run       execute an experiment (config file or --airplane preset) and
            write regret.csv / estimation.csv / meta.json
  validate  assumption report for a system
  care      solve the Riccati equation and print P, K, residual
  accept    run the acceptance suite (exit 1 on failure)
  bench     compare the simulation backends
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import __version__, acceptance, bench
from .errors import CtlqrError
from .experiment import ExperimentConfig, emit_csv, resolve_system, run_replicates
from .linalg import solve_care
from .model import validate


def _add_system_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--airplane", action="store_true", help="use the built-in airplane benchmark")
    group.add_argument("--system", metavar="FILE", help="path to a system file")


def _system_name(args) -> str:
    return "airplane" if args.airplane else args.system


def _cmd_run(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        cfg = ExperimentConfig(system=_system_name(args))
    overrides = {}
    for key in ("horizon", "dt", "replicates", "gamma0", "growth"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    dataset = run_replicates(cfg, backend=args.backend)
    paths = emit_csv(dataset, args.out)
    aborted = sum(1 for r in dataset.records if r.status != "ok")
    finals = [r.regret.normalized[-1] for r in dataset.records if r.status == "ok"]
    print(f"{cfg.replicates} replicates, horizon {cfg.horizon:g}, dt {cfg.dt:g} "
          f"({dataset.records[0].backend} backend)")
    if finals:
        print(f"final normalized regret: median {np.median(finals):.3f}, "
              f"range [{min(finals):.3f}, {max(finals):.3f}]")
    if aborted:
        print(f"aborted replicates: {aborted}")
    for name, path in paths.items():
        print(f"wrote {path}")
    return 0


def _cmd_validate(args) -> int:
    dyn, cost = resolve_system(_system_name(args))
    report = validate(dyn, cost)
    print(f"noise gain full-rank: {report.sigma_full_rank} "
          f"(singular values {report.sigma_smallest_sv:.3e} .. {report.sigma_largest_sv:.3e})")
    print(f"stabilizable: {report.stabilizable}"
          + (f" (Riccati residual {report.care_residual:.3e})" if report.stabilizable else ""))
    print(f"Q positive definite: {report.q_positive_definite}")
    print(f"R positive definite: {report.r_positive_definite}")
    for msg in report.messages:
        print(f"  - {msg}")
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def _cmd_care(args) -> int:
    dyn, cost = resolve_system(_system_name(args))
    sol = solve_care(dyn.A, dyn.B, cost.Q, cost.R)
    K = -np.linalg.solve(cost.R, dyn.B.T @ sol.P)
    with np.printoptions(precision=6, suppress=True):
        print("P =")
        print(sol.P)
        print("K =")
        print(K)
    print(f"residual = {sol.residual:.3e}")
    abscissa = sol.closed_loop_spectral_abscissa
    print(f"closed-loop spectral abscissa = {abscissa:.6f} "
          f"({'Hurwitz' if abscissa < 0 else 'NOT Hurwitz'})")
    return 0


def _cmd_accept(args) -> int:
    results = acceptance.run_all(backend=args.backend)
    for res in results:
        print(res.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return 1
    print(f"all {len(results)} criteria passed")
    return 0


def _cmd_bench(args) -> int:
    results = bench.run_benchmark(n_steps=args.steps, repeats=args.repeats)
    print(bench.format_benchmark(results, args.steps))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctlqr", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"ctlqr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment and write CSV outputs")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", metavar="FILE", help="config file (key = value lines)")
    src.add_argument("--airplane", action="store_true", help="airplane preset")
    src.add_argument("--system", metavar="FILE", help="system file with default settings")
    p_run.add_argument("--horizon", type=float)
    p_run.add_argument("--dt", type=float)
    p_run.add_argument("--replicates", type=int)
    p_run.add_argument("--gamma0", type=float)
    p_run.add_argument("--growth", type=float)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out", default="out", help="output directory (default: ./out)")
    p_run.add_argument("--backend", choices=("cython", "python"))
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check plant assumptions")
    _add_system_args(p_val)
    p_val.set_defaults(func=_cmd_validate)

    p_care = sub.add_parser("care", help="solve the Riccati equation")
    _add_system_args(p_care)
    p_care.set_defaults(func=_cmd_care)

    p_acc = sub.add_parser("accept", help="run the acceptance suite")
    p_acc.add_argument("--backend", choices=("cython", "python"))
    p_acc.set_defaults(func=_cmd_accept)

    p_bench = sub.add_parser("bench", help="benchmark the simulation backends")
    p_bench.add_argument("--steps", type=int, default=200_000)
    p_bench.add_argument("--repeats", type=int, default=3)
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CtlqrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
