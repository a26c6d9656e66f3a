"""Benchmark sweeps over (alpha, method) grids with CSV output.

A sweep generates (or receives) one instance per (n, seed), runs every
requested (alpha, method) combination on it, and reports one row per
combination.  Rows are grouped by alpha in the order given, with methods in
the canonical comparison order (fixed point, Newton, modified Newton,
chord) inside each group.  Everything except the timing column is a
deterministic function of the sweep.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import TextIO, Union

from .errors import NotConvergedError, SingularMatrixError
from .solvers import Method, SolveReport, SolverConfig, solve
from .tensor import ProblemInstance, generate_random_problem

CSV_HEADER = "alpha,method,n,factorizations,total_inner_steps,nres,time_ms,converged"

_METHOD_ORDER = {
    Method.FIXED_POINT: 0,
    Method.NEWTON: 1,
    Method.MODIFIED_NEWTON: 2,
    Method.CHORD: 3,
}


@dataclass(frozen=True)
class BenchSweep:
    """One benchmark specification: an instance plus the grid to run on it."""

    n: int
    seed: int
    alphas: tuple[float, ...]
    methods: tuple[Method, ...]
    inner_steps: int = 4
    tol: float = 1e-12
    max_outer: int = 200
    max_total_steps: int = 10000


@dataclass(frozen=True)
class BenchRow:
    alpha: float
    method: str
    n: int
    factorizations: int
    total_inner_steps: int
    nres: float
    time_ms: float
    converged: bool


def _row_from_report(alpha: float, method: Method, report: SolveReport) -> BenchRow:
    return BenchRow(
        alpha=alpha,
        method=method.value,
        n=report.instance.n,
        factorizations=report.factorizations,
        total_inner_steps=report.total_inner_steps,
        nres=report.nres_final,
        time_ms=report.elapsed * 1000.0,
        converged=report.converged,
    )


def run_benchmark(
    sweep: BenchSweep, instance: ProblemInstance | None = None
) -> list[BenchRow]:
    """Run the sweep and return one row per (alpha, method), in table order.

    A row whose solve hits an iteration cap or a singular derivative is
    reported with converged=False instead of aborting the sweep.  Pass
    ``instance`` to benchmark an existing problem instead of the generated
    (n, seed) one.
    """
    if instance is None:
        instance = generate_random_problem(sweep.n, sweep.seed)
    methods = sorted(set(sweep.methods), key=_METHOD_ORDER.__getitem__)
    rows = []
    for alpha in sweep.alphas:
        inst = instance.with_alpha(alpha)
        for method in methods:
            cfg = SolverConfig(
                method=method,
                inner_steps=sweep.inner_steps,
                tol=sweep.tol,
                max_outer=sweep.max_outer,
                max_total_steps=sweep.max_total_steps,
            )
            try:
                report = solve(inst, cfg)
            except (NotConvergedError, SingularMatrixError) as err:
                report = err.report
            if report is not None:
                rows.append(_row_from_report(alpha, method, report))
            else:  # singular before the first step left any log
                rows.append(
                    BenchRow(alpha, method.value, inst.n, 0, 0, math.nan, 0.0, False)
                )
    return rows


def _format_row(row: BenchRow) -> str:
    return ",".join(
        [
            repr(float(row.alpha)),
            row.method,
            str(row.n),
            str(row.factorizations),
            str(row.total_inner_steps),
            repr(float(row.nres)),
            f"{row.time_ms:.3f}",
            "true" if row.converged else "false",
        ]
    )


def rows_to_csv(rows: list[BenchRow]) -> str:
    return "\n".join([CSV_HEADER] + [_format_row(r) for r in rows]) + "\n"


def write_csv(rows: list[BenchRow], destination: Union[str, os.PathLike, TextIO]) -> str:
    text = rows_to_csv(rows)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="ascii") as handle:
            handle.write(text)
    return text


def format_table(rows: list[BenchRow]) -> str:
    """Aligned human-readable comparison table of the same rows."""
    header = ("alpha", "method", "n", "iter", "steps", "NRes", "time(ms)", "ok")
    cells = [header]
    for r in rows:
        cells.append(
            (
                f"{r.alpha:g}",
                r.method,
                str(r.n),
                str(r.factorizations),
                str(r.total_inner_steps),
                f"{r.nres:.3e}" if not math.isnan(r.nres) else "nan",
                f"{r.time_ms:.1f}",
                "yes" if r.converged else "NO",
            )
        )
    widths = [max(len(row[c]) for row in cells) for c in range(len(header))]
    lines = [
        "  ".join(cell.rjust(width) for cell, width in zip(row, widths))
        for row in cells
    ]
    return "\n".join(lines)
