"""Command-line front end: generate problems, solve them, run benchmarks.

Exit codes: 0 on success/convergence, 2 when a solve hits an iteration cap,
1 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import BenchSweep, format_table, run_benchmark, write_csv
from .errors import MlprError, NotConvergedError
from .problem_io import parse_problem, write_problem
from .solvers import Method, SolverConfig, solve
from .tensor import generate_random_problem

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2

_METHOD_TOKENS = [m.value for m in Method]


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors: reserve that for NotConverged
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="mlpr",
        description="Multilinear PageRank solvers and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a random problem file")
    gen.add_argument("--n", type=int, required=True, help="problem dimension")
    gen.add_argument("--seed", type=int, required=True, help="generator seed")
    gen.add_argument("--alpha", type=float, default=None, help="damping factor to embed")
    gen.add_argument("--out", required=True, help="destination problem file")

    slv = sub.add_parser("solve", help="solve a problem file")
    slv.add_argument("--problem", required=True, help="problem file to load")
    slv.add_argument("--alpha", type=float, default=None, help="override file alpha")
    slv.add_argument("--method", required=True, choices=_METHOD_TOKENS)
    slv.add_argument("--inner", type=int, default=4, help="solves per factorization")
    slv.add_argument("--tol", type=float, default=1e-12, help="NRes stopping threshold")
    slv.add_argument("--max-outer", type=int, default=200, help="factorization cap")
    slv.add_argument("--max-steps", type=int, default=10000, help="total step cap")
    slv.add_argument("--report", default=None, help="write a JSON run report here")

    bch = sub.add_parser("bench", help="benchmark methods over an alpha sweep")
    bch.add_argument("--n", type=int, required=True)
    bch.add_argument("--seed", type=int, required=True)
    bch.add_argument("--alphas", required=True, help="comma-separated alpha list")
    bch.add_argument("--methods", required=True, help="comma-separated method list")
    bch.add_argument("--inner", type=int, default=4)
    bch.add_argument("--tol", type=float, default=1e-12)
    bch.add_argument("--max-outer", type=int, default=200)
    bch.add_argument("--max-steps", type=int, default=10000)
    bch.add_argument("--csv", required=True, help="destination CSV file")
    return parser


def _cmd_generate(args) -> int:
    inst = generate_random_problem(args.n, args.seed, args.alpha)
    write_problem(inst, args.out)
    print(f"wrote n={args.n} seed={args.seed} instance to {args.out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = parse_problem(args.problem)
    if args.alpha is not None:
        inst = inst.with_alpha(args.alpha)
    if inst.alpha is None:
        print("error: problem file has no alpha; pass --alpha", file=sys.stderr)
        return EXIT_INPUT
    cfg = SolverConfig(
        method=Method(args.method),
        inner_steps=args.inner,
        tol=args.tol,
        max_outer=args.max_outer,
        max_total_steps=args.max_steps,
    )
    code = EXIT_OK
    try:
        report = solve(inst, cfg)
    except NotConvergedError as err:
        report = err.report
        code = EXIT_NOT_CONVERGED
    print(
        f"method={report.method.value} n={report.instance.n} alpha={inst.alpha:g} "
        f"converged={str(report.converged).lower()} nres={report.nres_final:.3e} "
        f"factorizations={report.factorizations} steps={report.total_inner_steps} "
        f"time_ms={report.elapsed * 1000.0:.1f}"
    )
    if args.report:
        with open(args.report, "w", encoding="ascii") as handle:
            json.dump(report.to_dict(), handle, indent=2)
            handle.write("\n")
    return code


def _cmd_bench(args) -> int:
    try:
        alphas = tuple(float(tok) for tok in args.alphas.split(",") if tok.strip())
        methods = tuple(
            Method(tok.strip()) for tok in args.methods.split(",") if tok.strip()
        )
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    if not alphas or not methods:
        print("error: need at least one alpha and one method", file=sys.stderr)
        return EXIT_INPUT
    sweep = BenchSweep(
        n=args.n,
        seed=args.seed,
        alphas=alphas,
        methods=methods,
        inner_steps=args.inner,
        tol=args.tol,
        max_outer=args.max_outer,
        max_total_steps=args.max_steps,
    )
    rows = run_benchmark(sweep)
    write_csv(rows, args.csv)
    print(format_table(rows))
    print(f"wrote {len(rows)} rows to {args.csv}")
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOT_CONVERGED


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "generate": _cmd_generate,
        "solve": _cmd_solve,
        "bench": _cmd_bench,
    }[args.command]
    try:
        return handler(args)
    except (MlprError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())
