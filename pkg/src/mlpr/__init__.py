"""Multilinear PageRank: solvers for x = alpha*R(x (x) x) + (1-alpha)*v.

The package solves the stationary-distribution equation of damped
higher-order Markov chains on dense third-order stochastic tensors, with
four methods (fixed point, Newton, modified Newton with factorization
reuse, chord), monotone-convergence instrumentation, a deterministic
problem generator, and a benchmark CLI (``mlpr``).
"""

from .bench import (
    CSV_HEADER,
    BenchRow,
    BenchSweep,
    format_table,
    rows_to_csv,
    run_benchmark,
    write_csv,
)
from .errors import (
    DimensionMismatchError,
    InvalidAlphaError,
    MlprError,
    NotConvergedError,
    ParseError,
    ShapeError,
    SingularDenominatorError,
    SingularMatrixError,
    StochasticityError,
    ZeroStateError,
)
from .linalg import (
    Factorization,
    MatrixVerdict,
    MmatrixDiagnosis,
    diagnose_mmatrix,
    lu_factorize,
    solve_factored,
)
from .problem_io import parse_problem, parse_problem_text, write_problem
from .residual import (
    DerivativeMatrix,
    PointEvaluation,
    ResidualValue,
    derivative_matrix,
    evaluate_point,
    nres,
    predicted_sum,
    residual,
    second_derivative_apply,
)
from .solvers import (
    MONOTONE_TOL,
    Method,
    MonotoneViolation,
    SolveReport,
    SolverConfig,
    chord_solve,
    fixed_point_solve,
    modified_newton_solve,
    newton_solve,
    solve,
    verify_monotone_theorem,
)
from .tensor import (
    SEED_ZERO_STATE,
    STOCHASTIC_TOL,
    FlattenedTensor,
    ProblemInstance,
    PrngState,
    apply_bilinear,
    flatten_tensor,
    generate_random_problem,
    prng_next,
    prng_stream,
    seed_state,
)

__version__ = "0.1.0"
