"""Command-line interface: instance generation, solves, benchmarks, checks."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import diagnostics, qp


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--l", type=int, default=20)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--M", type=float, default=16777216.0)
    p.add_argument("--m", type=float, default=1048576.0)
    p.add_argument("--seed", type=int, default=1)


def _add_solve_flags(p: argparse.ArgumentParser) -> None:
    _add_instance_flags(p)
    p.add_argument("--method", choices=["daipp", "prox_grad"], default="daipp")
    p.add_argument("--rho", type=float, default=1e-7)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--max-outer", type=int, default=10000)
    p.add_argument("--max-inner", type=int, default=1000000)
    p.add_argument("--config", type=str, default=None,
                   help="JSON file with the same keys as the flags")
    p.add_argument("--out", type=str, default=None, help="write CSV here")


def _config_from_args(args) -> qp.RunConfig:
    values = dict(method=args.method, l=args.l, n=args.n, M=args.M, m=args.m,
                  rho_bar=args.rho, lam=args.lam, theta=args.theta,
                  delta=args.delta, seed=args.seed, max_outer=args.max_outer,
                  max_inner=args.max_inner)
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        alias = {"rho": "rho_bar", "lambda": "lam", "max-outer": "max_outer",
                 "max-inner": "max_inner"}
        for key, val in raw.items():
            values[alias.get(key, key)] = val
    return qp.RunConfig(**values)


def cmd_generate(args) -> int:
    inst = qp.generate_qp(args.l, args.n, args.M, args.m, args.seed)
    np.savez(args.out, A=inst.A, B=inst.B, D_diag=inst.D_diag, b=inst.b,
             alpha1=inst.alpha1, alpha2=inst.alpha2, m=inst.m, M=inst.M,
             seed=inst.seed)
    print(f"instance written to {args.out}: realized M={inst.M:.8g} "
          f"m={inst.m:.8g} (seed {inst.seed}, PRNG numpy PCG64)")
    return 0


def cmd_solve(args) -> int:
    config = _config_from_args(args)
    report = qp.run_experiment(config)
    text = qp.emit_csv([report])
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_bench(args) -> int:
    reports = []
    for pair in args.pairs.split(","):
        M_s, m_s = pair.split(":")
        for method in args.methods.split(","):
            config = qp.RunConfig(method=method, l=args.l, n=args.n,
                                  M=float(M_s), m=float(m_s),
                                  rho_bar=args.rho, seed=args.seed,
                                  max_outer=args.max_outer,
                                  max_inner=args.max_inner)
            reports.append(qp.run_experiment(config))
    print(qp.emit_table(reports))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(qp.emit_csv(reports) + "\n")
    return 0


def cmd_check(args) -> int:
    config = _config_from_args(args)
    if config.method != "daipp":
        print("check replays diagnostics for the daipp method only",
              file=sys.stderr)
        return 2
    report = qp.run_experiment(config)
    inst = qp.generate_qp(config.l, config.n, config.M, config.m, config.seed)
    prob = qp.make_problem(inst)
    checks = diagnostics.check_run(prob, report.solve_report, report.solution)
    print(diagnostics.render_reports(checks))
    failed = [c for c in checks if not c.satisfied]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="accprox",
        description="Accelerated inexact proximal point solver and benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a calibrated instance")
    _add_instance_flags(p_gen)
    p_gen.add_argument("--out", type=str, required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_solve = sub.add_parser("solve", help="solve one instance")
    _add_solve_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="sweep curvature pairs")
    p_bench.add_argument("--pairs", type=str, required=True,
                         help="comma-separated M:m pairs")
    p_bench.add_argument("--methods", type=str, default="daipp,prox_grad")
    p_bench.add_argument("--l", type=int, default=20)
    p_bench.add_argument("--n", type=int, default=300)
    p_bench.add_argument("--rho", type=float, default=1e-7)
    p_bench.add_argument("--seed", type=int, default=1)
    p_bench.add_argument("--max-outer", type=int, default=10000)
    p_bench.add_argument("--max-inner", type=int, default=1000000)
    p_bench.add_argument("--out", type=str, default=None)
    p_bench.set_defaults(func=cmd_bench)

    p_check = sub.add_parser("check", help="replay diagnostics on a solve")
    _add_solve_flags(p_check)
    p_check.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
