"""Command-line entry points.

Subcommands:
  solve       run the identification-SQP loop on a named instance
  scan-gamma  tabulate the stepsize window along a run (CSV)
  bench       run the experiment matrix, write artifacts + checksums
  verify      run the self-check suite (prox inclusions, derivative
              checks, manifold property checkers)

Exit codes: 0 on success, 1 when a check or solve fails, 2 on usage
errors (bad flags, unknown instance).
"""

import argparse
import json
import sys

from . import bench, driver, registry


def _add_solve(sub):
    p = sub.add_parser("solve", help="run Algorithm 1 on a named instance")
    p.add_argument("--instance", required=True,
                   help=f"one of: {', '.join(registry.instance_names())}")
    p.add_argument("--seed", type=int, default=None,
                   help="instance seed (random instances only)")
    p.add_argument("--gamma0", default="auto",
                   help="initial prox stepsize, or 'auto'")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="step/feasibility/stationarity tolerance")
    p.add_argument("--max-iter", type=int, default=60)
    p.add_argument("--precision", choices=("double", "extended"),
                   default="double")
    p.add_argument("--soc", choices=("classic", "literal"), default="classic",
                   help="second-order correction rule")
    p.add_argument("--trace", default=None, metavar="OUT.JSON",
                   help="write the full iteration trace as JSON")


def _add_scan_gamma(sub):
    p = sub.add_parser("scan-gamma",
                       help="stepsize window along a run, one CSV row "
                            "per iteration")
    p.add_argument("--instance", required=True)
    p.add_argument("--trace", required=True, metavar="OUT.CSV")


def _add_bench(sub):
    p = sub.add_parser("bench", help="run the experiment matrix")
    p.add_argument("--config", default="default", metavar="CFG.JSON",
                   help="experiment config file, or 'default'")
    p.add_argument("--out", required=True, metavar="DIR")


def _add_verify(sub):
    p = sub.add_parser("verify", help="run the self-check suite")
    p.add_argument("--full", action="store_true",
                   help="include the large eigenvalue instance and the "
                        "extended input counts")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="proxsqp",
        description="structure-exploiting solver for max / maximum-"
                    "eigenvalue composite minimization")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_solve(sub)
    _add_scan_gamma(sub)
    _add_bench(sub)
    _add_verify(sub)
    return parser


def _get_instance(parser, name, seed=None):
    try:
        return registry.get_instance(name, seed)
    except KeyError as e:
        parser.error(str(e))


def _cmd_solve(parser, args):
    inst = _get_instance(parser, args.instance, args.seed)
    if args.gamma0 == "auto":
        gamma0 = inst.meta.get("gamma0", "auto")
    else:
        try:
            gamma0 = float(args.gamma0)
        except ValueError:
            parser.error(f"--gamma0 must be a number or 'auto', "
                         f"got {args.gamma0!r}")
    opts = driver.SolveOptions(gamma0=gamma0, max_iter=args.max_iter,
                               tol_step=args.tol, tol_feas=args.tol,
                               tol_stat=args.tol, soc_rule=args.soc,
                               precision=args.precision)
    trace = driver.solve(inst, registry.default_start(inst), opts)
    if args.trace:
        trace.to_json(args.trace)
    accepted = sum(1 for r in trace.records if r.accepted)
    last = trace.records[-1] if trace.records else None
    print(f"instance   {inst.name}")
    print(f"status     {trace.status}")
    print(f"iterations {len(trace.records)} ({accepted} accepted)")
    print(f"F(x)       {trace.f_final}")
    if last is not None:
        print(f"manifold   {last.manifold}")
    return 0 if trace.status == "Converged" else 1


def _cmd_scan_gamma(parser, args):
    try:
        _, rows = bench.gamma_window_rows({"instance": args.instance})
    except KeyError as e:
        parser.error(str(e))
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    bench.write_csv(args.trace, bench.GAMMA_WINDOW_HEADER, rows)
    print(f"wrote {len(rows)} rows to {args.trace}")
    return 0


def _cmd_bench(parser, args):
    try:
        produced = bench.run_bench(args.config, args.out)
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for name in produced:
        print(name)
    print(f"wrote {len(produced)} artifacts + checksums.json to {args.out}")
    return 0


def _cmd_verify(parser, args):
    report = bench.run_verify(full=args.full)
    json.dump(report, sys.stdout, indent=1)
    print()
    return 0 if report["passed"] else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"solve": _cmd_solve, "scan-gamma": _cmd_scan_gamma,
               "bench": _cmd_bench, "verify": _cmd_verify}[args.command]
    return handler(parser, args)


if __name__ == "__main__":
    raise SystemExit(main())
