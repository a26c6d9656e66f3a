"""Triangular factorization with reuse, and M-matrix certificates.

The solvers' whole cost model rests on the split exposed here: one
:func:`lu_factorize` call buys unlimited :func:`solve_factored` calls
against the same matrix.  LAPACK (via scipy) does the numerical work;
this module owns the singularity threshold and the diagnostic verdicts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, SingularMatrixError
from .residual import DerivativeMatrix

#: Pivots below this multiple of ||J||_1 are treated as exact singularity.
PIVOT_RTOL = 1e-14


@dataclass(frozen=True)
class Factorization:
    """Partial-pivoting LU factors of a derivative matrix, reusable for solves.

    ``lu`` and ``piv`` are in LAPACK getrf form; ``source`` aliases the
    factored (immutable) matrix so the round-trip diagnostic needs no copy.
    """

    lu: np.ndarray
    piv: np.ndarray
    norm1: float
    source: np.ndarray
    base_point_tag: object = None

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    @property
    def lower(self) -> np.ndarray:
        return np.tril(self.lu, -1) + np.eye(self.n)

    @property
    def upper(self) -> np.ndarray:
        return np.triu(self.lu)

    @property
    def permutation(self) -> np.ndarray:
        """Row order p such that source[p] == lower @ upper (up to rounding)."""
        p = np.arange(self.n)
        for i, swap in enumerate(self.piv):
            p[i], p[swap] = p[swap], p[i]
        return p

    def roundtrip_error(self) -> float:
        """1-norm of (permuted source) - L @ U, the on-demand factor check."""
        delta = self.source[self.permutation] - self.lower @ self.upper
        return float(np.abs(delta).sum(axis=0).max())


def lu_factorize(j: DerivativeMatrix, tag: object = None) -> Factorization:
    """Factor a derivative matrix with partial pivoting.

    Raises SingularMatrixError if any pivot magnitude falls below
    ``PIVOT_RTOL * ||J||_1``, which is how a base point with
    alpha * e^T x too close to 1/2 surfaces.
    """
    m = j.matrix
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    norm1 = float(np.abs(m).sum(axis=0).max())
    with warnings.catch_warnings():
        # scipy warns instead of raising on exact zero pivots; the pivot
        # check below converts both cases into the same error.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m)
    pivots = np.abs(np.diag(lu))
    if norm1 == 0.0 or pivots.min() < PIVOT_RTOL * norm1:
        raise SingularMatrixError(
            f"pivot {pivots.min():.3e} below threshold {PIVOT_RTOL * norm1:.3e}; "
            f"derivative is numerically singular (base point sum "
            f"{j.base_point_sum!r})"
        )
    if tag is None:
        tag = j.base_point_sum
    return Factorization(lu, piv, norm1, m, tag)


def solve_factored(f: Factorization, b: np.ndarray) -> np.ndarray:
    """Solve J z = b against an existing factorization.

    ``b`` may be a vector or a matrix of stacked right-hand-side columns;
    the factorization is immutable and reusable for any number of solves.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != f.n:
        raise DimensionMismatchError(
            f"right-hand side must have leading dimension {f.n}, got {b.shape}"
        )
    return scipy.linalg.lu_solve((f.lu, f.piv), b)


class MatrixVerdict(Enum):
    NONSINGULAR_M = "NonsingularM"
    SINGULAR = "Singular"
    INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class MmatrixDiagnosis:
    """Certificate-style classification of a derivative matrix.

    The verdict is what column diagonal dominance can certify, not a full
    spectral classification: NONSINGULAR_M means the Z-pattern holds and
    every column is strictly dominant (positive margin), SINGULAR marks the
    boundary case of a Z-matrix with zero worst-column margin, and
    INDEFINITE is everything this certificate cannot decide.
    """

    is_z_matrix: bool
    column_dominance_margin: float
    verdict: MatrixVerdict


#: Off-diagonal entries above this are not Z-pattern; margins within it of
#: zero (relative to ||J||_1) count as the singular boundary.
Z_PATTERN_TOL = 1e-14
MARGIN_ZERO_RTOL = 1e-13


def diagnose_mmatrix(j: DerivativeMatrix) -> MmatrixDiagnosis:
    """Classify J by Z-pattern and column diagonal dominance.

    Column dominance is the right certificate here because the column sums
    of a derivative matrix are the controlled quantity (1 - 2*alpha*e^T x);
    for a Z-matrix with nonnegative diagonal the margin equals the worst
    column sum.
    """
    m = j.matrix
    n = m.shape[0]
    diag = np.diag(m)
    off = m - np.diag(diag)
    is_z = bool(off.max(initial=0.0) <= Z_PATTERN_TOL)
    margin = float((diag - np.abs(off).sum(axis=0)).min())
    norm1 = float(np.abs(m).sum(axis=0).max())
    zero_band = MARGIN_ZERO_RTOL * max(1.0, norm1)
    if is_z and margin > zero_band:
        verdict = MatrixVerdict.NONSINGULAR_M
    elif is_z and abs(margin) <= zero_band:
        verdict = MatrixVerdict.SINGULAR
    else:
        verdict = MatrixVerdict.INDEFINITE
    return MmatrixDiagnosis(is_z, margin, verdict)
