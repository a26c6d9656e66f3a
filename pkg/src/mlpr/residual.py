"""Residual map F, its first and second derivatives, and the NRes metric.

For an instance (R, alpha, v) the residual of a candidate vector x is

    F(x) = x - alpha * R(x (x) x) - (1 - alpha) * v,

its Frechet derivative is the matrix J(x) = I - alpha * R(x (x) I + I (x) x),
and the second derivative is the constant bilinear form
F''(z1, z2) = -alpha * R(z1 (x) z2 + z2 (x) z1).  F is exactly quadratic, so
F(x + h) = F(x) + J(x) h + F''(h, h) / 2 holds with no remainder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, SingularDenominatorError
from .tensor import ProblemInstance, apply_bilinear


@dataclass(frozen=True)
class ResidualValue:
    """Residual vector together with its precomputed entry sum."""

    vector: np.ndarray
    sum: float


@dataclass(frozen=True)
class DerivativeMatrix:
    """Dense Frechet derivative J(x) and the base-point sum e^T x.

    Every column of the matrix sums to 1 - 2*alpha*(e^T x); for x >= 0 the
    matrix is a Z-matrix.  Both facts are what the M-matrix diagnostics and
    the sum prediction rely on.
    """

    matrix: np.ndarray
    base_point_sum: float

    def __post_init__(self):
        # factorizations alias this array, so freeze it
        self.matrix.flags.writeable = False


@dataclass(frozen=True)
class PointEvaluation:
    """Residual, its norms, and the shared quadratic term at one point.

    Solver loops use this bundle so each iterate costs a single bilinear
    apply: the quadratic term R(x (x) x) feeds the residual, the NRes
    denominator, and the fixed-point update alike.  Both the normalized and
    the plain 1-norm residual are kept so either stopping metric can be
    audited afterwards.
    """

    residual: ResidualValue
    nres: float
    residual_norm1: float
    quadratic_term: np.ndarray


def _check_vector(inst: ProblemInstance, x: np.ndarray, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (inst.n,):
        raise DimensionMismatchError(
            f"{name} must have length {inst.n}, got shape {x.shape}"
        )
    return x


def evaluate_point(inst: ProblemInstance, x: np.ndarray) -> PointEvaluation:
    """Evaluate F(x) and NRes(x) with one bilinear apply."""
    x = _check_vector(inst, x)
    alpha = inst.require_alpha()
    rxx = apply_bilinear(inst.tensor, x, x)
    vec = x - alpha * rxx - (1.0 - alpha) * inst.v
    norm1 = float(np.abs(vec).sum())
    denom = (
        (1.0 - alpha) * np.abs(inst.v).sum()
        + alpha * np.abs(rxx).sum()
        + np.abs(x).sum()
    )
    return PointEvaluation(
        ResidualValue(vec, float(vec.sum())), norm1 / float(denom), norm1, rxx
    )


def residual(inst: ProblemInstance, x: np.ndarray) -> ResidualValue:
    """Residual F(x) = x - alpha*R(x(x)x) - (1-alpha)*v with its sum."""
    return evaluate_point(inst, x).residual


def nres(inst: ProblemInstance, x: np.ndarray) -> float:
    """Normalized 1-norm residual.

    NRes(x) = ||F(x)||_1 / ((1-alpha)*||v||_1 + alpha*||R(x(x)x)||_1 + ||x||_1);
    it equals 1 at x = 0 and 0 exactly at a solution.
    """
    return evaluate_point(inst, x).nres


def derivative_matrix(inst: ProblemInstance, x: np.ndarray) -> DerivativeMatrix:
    """Assemble the dense Frechet derivative J(x) = I - alpha*R(x(x)I + I(x)x).

    Column j equals e_j - alpha*(R(x (x) e_j) + R(e_j (x) x)); the assembly
    below contracts the cube view once per Kronecker slot instead of looping
    over unit vectors, which column tests verify is the same matrix.
    """
    x = _check_vector(inst, x)
    alpha = inst.require_alpha()
    cube = inst.tensor.cube
    # contract the fast index j: R(I (x) x), columns indexed by k
    left = cube @ x
    # contract the slow index k: R(x (x) I), columns indexed by j
    right = np.matmul(x, cube)
    j = np.eye(inst.n) - alpha * (left + right)
    return DerivativeMatrix(j, float(x.sum()))


def second_derivative_apply(
    inst: ProblemInstance, z1: np.ndarray, z2: np.ndarray
) -> np.ndarray:
    """Apply the constant second derivative: -alpha*R(z1 (x) z2 + z2 (x) z1)."""
    z1 = _check_vector(inst, z1, "z1")
    z2 = _check_vector(inst, z2, "z2")
    alpha = inst.require_alpha()
    return -alpha * (
        apply_bilinear(inst.tensor, z1, z2) + apply_bilinear(inst.tensor, z2, z1)
    )


def predicted_sum(alpha: float, sum_x: float) -> float:
    """Entry sum of the exact Newton step taken from any point with e^T x = sum_x.

    Summing the Newton system row-wise collapses it to the scalar identity

        e^T y = (1 - alpha - alpha*sum_x^2) / (1 - 2*alpha*sum_x),

    because every column of J sums to 1 - 2*alpha*sum_x.
    """
    denom = 1.0 - 2.0 * alpha * sum_x
    if denom == 0.0:
        raise SingularDenominatorError(
            f"1 - 2*alpha*sum_x vanishes at alpha={alpha}, sum_x={sum_x}"
        )
    return (1.0 - alpha - alpha * sum_x * sum_x) / denom
