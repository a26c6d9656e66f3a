"""Fixed-point, Newton, modified Newton, and chord iterations.

All methods start from x = 0 by default, stop when NRes falls to the
configured tolerance (checked after every step, including steps inside a
reuse block), and log per-step NRes and entry-sum histories.  The counter
reported as ``factorizations`` is the number of derivative factorizations
actually performed, which is the standard cost unit for comparing the
Newton-type variants: a solver that stops at inner position s > 0 of outer
block i has performed i + 1 of them, one that stops exactly at a block
boundary has performed i.

From a nonnegative start with F(x0) <= 0 and e^T x0 <= 1 (x0 = 0 qualifies)
and alpha < 1/2, every method produces an entrywise nondecreasing iterate
sequence converging to the stochastic solution;
:func:`verify_monotone_theorem` replays a logged run against that
guarantee.  Runs with alpha >= 1/2 are permitted and simply report what
happens.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotConvergedError,
    SingularMatrixError,
)
from .linalg import Factorization, lu_factorize, solve_factored
from .residual import PointEvaluation, derivative_matrix, evaluate_point
from .tensor import ProblemInstance

#: Entrywise slack for monotonicity and sign checks on logged iterates;
#: exact arithmetic would need none, floating point needs a few ulps.
MONOTONE_TOL = 1e-13


class Method(str, Enum):
    FIXED_POINT = "fixed"
    NEWTON = "newton"
    MODIFIED_NEWTON = "modified"
    CHORD = "chord"


@dataclass(frozen=True)
class SolverConfig:
    """Method selection and iteration controls.

    ``inner_steps`` is the number of solves performed against one
    factorization in the modified Newton method (the other methods ignore
    it: Newton is the inner_steps=1 special case, the chord method behaves
    as an unbounded block).  ``max_outer`` caps factorizations and
    ``max_total_steps`` caps steps of any kind.
    """

    method: Method
    inner_steps: int = 4
    tol: float = 1e-12
    max_outer: int = 200
    max_total_steps: int = 10000
    enforce_monotone: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.inner_steps < 1:
            raise ValueError(f"inner_steps must be >= 1, got {self.inner_steps}")
        if self.max_outer < 1 or self.max_total_steps < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class SolveReport:
    """Everything a run produced, converged or not.

    The per-iterate histories (``nres_history``, ``residual_norm_history``,
    ``sum_history``) each start with the initial point; stopping is decided
    on NRes, and the plain 1-norm of F is recorded alongside so either
    metric can be audited.  ``iterates`` carries the full trail when the run
    was logged (``enforce_monotone=True``) and is what
    :func:`verify_monotone_theorem` consumes.  ``monotone_violations`` is the
    online count of entrywise decreases beyond tolerance.
    """

    solution: np.ndarray
    nres_final: float
    nres_history: list[float]
    factorizations: int
    total_inner_steps: int
    monotone_violations: int
    sum_history: list[float]
    elapsed: float
    converged: bool
    method: Method
    residual_norm_history: list[float]
    instance: ProblemInstance = field(repr=False)
    iterates: list[np.ndarray] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        """JSON-friendly summary (histories included, iterate trail omitted)."""
        return {
            "method": self.method.value,
            "n": self.instance.n,
            "alpha": self.instance.alpha,
            "converged": self.converged,
            "nres_final": self.nres_final,
            "factorizations": self.factorizations,
            "total_inner_steps": self.total_inner_steps,
            "monotone_violations": self.monotone_violations,
            "elapsed": self.elapsed,
            "solution": self.solution.tolist(),
            "nres_history": self.nres_history,
            "residual_norm_history": self.residual_norm_history,
            "sum_history": self.sum_history,
        }


@dataclass(frozen=True)
class MonotoneViolation:
    """One failed check at one logged step."""

    step: int
    check: str
    magnitude: float


class _Run:
    """Shared per-run bookkeeping: histories, logging, and report assembly."""

    def __init__(self, inst: ProblemInstance, cfg: SolverConfig, method: Method):
        self.inst = inst
        self.cfg = cfg
        self.method = method
        self.started = time.perf_counter()
        self.nres_history: list[float] = []
        self.residual_norm_history: list[float] = []
        self.sum_history: list[float] = []
        self.iterates: list[np.ndarray] | None = [] if cfg.enforce_monotone else None
        self.monotone_violations = 0
        self._prev: np.ndarray | None = None
        self.x: np.ndarray | None = None
        self.pe: PointEvaluation | None = None
        self.factorizations = 0
        self.steps = 0

    def record(self, x: np.ndarray, pe: PointEvaluation) -> None:
        self.x, self.pe = x, pe
        self.nres_history.append(pe.nres)
        self.residual_norm_history.append(pe.residual_norm1)
        self.sum_history.append(float(x.sum()))
        if self._prev is not None and (x < self._prev - MONOTONE_TOL).any():
            self.monotone_violations += 1
        self._prev = x
        if self.iterates is not None:
            self.iterates.append(x.copy())

    @property
    def converged(self) -> bool:
        return self.pe.nres <= self.cfg.tol

    def report(self) -> SolveReport:
        return SolveReport(
            solution=self.x,
            nres_final=self.pe.nres,
            nres_history=self.nres_history,
            factorizations=self.factorizations,
            total_inner_steps=self.steps,
            monotone_violations=self.monotone_violations,
            sum_history=self.sum_history,
            elapsed=time.perf_counter() - self.started,
            converged=self.converged,
            method=self.method,
            residual_norm_history=self.residual_norm_history,
            instance=self.inst,
            iterates=self.iterates,
        )

    def check_caps(self) -> None:
        if self.steps >= self.cfg.max_total_steps:
            raise NotConvergedError(
                f"{self.method.value}: step cap {self.cfg.max_total_steps} reached "
                f"with NRes {self.pe.nres:.3e} > tol {self.cfg.tol:.3e}",
                report=self.report(),
            )
        if self.factorizations >= self.cfg.max_outer:
            raise NotConvergedError(
                f"{self.method.value}: factorization cap {self.cfg.max_outer} "
                f"reached with NRes {self.pe.nres:.3e} > tol {self.cfg.tol:.3e}",
                report=self.report(),
            )

    def factorize(self) -> Factorization:
        try:
            fact = lu_factorize(derivative_matrix(self.inst, self.x))
        except SingularMatrixError as err:
            raise SingularMatrixError(str(err), report=self.report()) from err
        self.factorizations += 1
        return fact

    def advance(self, x_next: np.ndarray) -> None:
        self.steps += 1
        self.record(x_next, evaluate_point(self.inst, x_next))


def _start(inst: ProblemInstance, cfg: SolverConfig, method: Method, x0) -> _Run:
    inst.require_alpha()
    if x0 is None:
        x0 = np.zeros(inst.n)
    else:
        x0 = np.array(x0, dtype=np.float64)
        if x0.shape != (inst.n,):
            raise DimensionMismatchError(
                f"x0 must have length {inst.n}, got shape {x0.shape}"
            )
    run = _Run(inst, cfg, method)
    run.record(x0, evaluate_point(inst, x0))
    return run


def fixed_point_solve(
    inst: ProblemInstance, cfg: SolverConfig, x0=None
) -> SolveReport:
    """Iterate the map x <- alpha*R(x (x) x) + (1-alpha)*v directly.

    Performs no factorizations.  Starting from zero the sequence increases
    monotonically; the linear convergence rate degrades towards 1 as alpha
    approaches 1/2.
    """
    run = _start(inst, cfg, Method.FIXED_POINT, x0)
    alpha = inst.alpha
    while not run.converged:
        run.check_caps()
        run.advance(alpha * run.pe.quadratic_term + (1.0 - alpha) * inst.v)
    return run.report()


def newton_solve(inst: ProblemInstance, cfg: SolverConfig, x0=None) -> SolveReport:
    """Newton iteration: factor the derivative at every step.

    Each step solves J(x_k) d = -F(x_k) with a fresh factorization and sets
    x_{k+1} = x_k + d.  From x = 0 the first derivative is the identity, so
    the first step lands on (1-alpha)*v.
    """
    run = _start(inst, cfg, Method.NEWTON, x0)
    while not run.converged:
        run.check_caps()
        fact = run.factorize()
        run.advance(run.x + solve_factored(fact, -run.pe.residual.vector))
    return run.report()


def modified_newton_solve(
    inst: ProblemInstance, cfg: SolverConfig, x0=None
) -> SolveReport:
    """Newton variant that reuses each factorization for ``inner_steps`` solves.

    Outer round i factors the derivative at its base point once, then takes
    up to n_i = cfg.inner_steps steps solving against that factorization
    with the residual refreshed each step; the next round starts where the
    block ended.  Convergence is tested after every inner step, so a run may
    terminate mid-block.  With inner_steps = 1 the iterates coincide with
    :func:`newton_solve` step for step.
    """
    run = _start(inst, cfg, Method.MODIFIED_NEWTON, x0)
    while not run.converged:
        run.check_caps()
        fact = run.factorize()
        for _ in range(cfg.inner_steps):
            run.advance(run.x + solve_factored(fact, -run.pe.residual.vector))
            if run.converged or run.steps >= run.cfg.max_total_steps:
                break
    return run.report()


def chord_solve(inst: ProblemInstance, cfg: SolverConfig, x0=None) -> SolveReport:
    """Chord method: one factorization at the start, reused for every step.

    This is the unbounded-block limit of the modified method.  From the
    default start x0 = 0 the factored derivative is the identity, so the
    chord iterates coincide with the fixed-point iteration from that start;
    the method only differs from it when launched elsewhere.  Convergence is
    linear: the error ratio tends to a constant below one rather than to
    zero.
    """
    run = _start(inst, cfg, Method.CHORD, x0)
    fact: Factorization | None = None
    while not run.converged:
        run.check_caps()
        if fact is None:
            fact = run.factorize()
        run.advance(run.x + solve_factored(fact, -run.pe.residual.vector))
    return run.report()


_DISPATCH = {
    Method.FIXED_POINT: fixed_point_solve,
    Method.NEWTON: newton_solve,
    Method.MODIFIED_NEWTON: modified_newton_solve,
    Method.CHORD: chord_solve,
}


def solve(inst: ProblemInstance, cfg: SolverConfig, x0=None) -> SolveReport:
    """Run the method selected by ``cfg.method``."""
    return _DISPATCH[cfg.method](inst, cfg, x0)


def _residual_rows(inst: ProblemInstance, x_rows: np.ndarray) -> np.ndarray:
    """F evaluated at every row of ``x_rows``, chunked to bound memory."""
    r = inst.tensor.entries
    n = inst.n
    alpha = inst.require_alpha()
    out = np.empty_like(x_rows)
    chunk = max(1, 4_000_000 // (n * n))
    for lo in range(0, len(x_rows), chunk):
        block = x_rows[lo : lo + chunk]
        kron_rows = np.einsum("sk,sj->skj", block, block).reshape(len(block), n * n)
        out[lo : lo + chunk] = (
            block - alpha * (kron_rows @ r.T) - (1.0 - alpha) * inst.v
        )
    return out


def verify_monotone_theorem(report: SolveReport) -> list[MonotoneViolation]:
    """Replay a logged run against the monotone-convergence guarantee.

    Checks every logged iterate (inner steps included) for: entrywise
    nondecrease between consecutive iterates, nonnegativity, entry sum at
    most one, and nonpositive residual, all within ``MONOTONE_TOL``.  An
    empty list means the run behaved as the theory for alpha < 1/2 and a
    valid start (F(x0) <= 0, x0 >= 0, e^T x0 <= 1) predicts; a start
    violating those hypotheses may legitimately produce violations.
    """
    if report.iterates is None:
        raise ValueError(
            "report has no iterate log; run with enforce_monotone=True"
        )
    x_rows = np.asarray(report.iterates)
    violations: list[MonotoneViolation] = []

    drops = (x_rows[1:] - x_rows[:-1]).min(axis=1)
    for idx in np.flatnonzero(drops < -MONOTONE_TOL):
        violations.append(
            MonotoneViolation(int(idx) + 1, "monotonicity", float(drops[idx]))
        )
    lows = x_rows.min(axis=1)
    for idx in np.flatnonzero(lows < -MONOTONE_TOL):
        violations.append(
            MonotoneViolation(int(idx), "nonnegativity", float(lows[idx]))
        )
    sums = x_rows.sum(axis=1)
    for idx in np.flatnonzero(sums > 1.0 + MONOTONE_TOL):
        violations.append(
            MonotoneViolation(int(idx), "sum_bound", float(sums[idx] - 1.0))
        )
    residual_highs = _residual_rows(inst=report.instance, x_rows=x_rows).max(axis=1)
    for idx in np.flatnonzero(residual_highs > MONOTONE_TOL):
        violations.append(
            MonotoneViolation(int(idx), "residual_sign", float(residual_highs[idx]))
        )
    violations.sort(key=lambda v: (v.step, v.check))
    return violations
