import numpy as np
import pytest

from mlpr import (
    DerivativeMatrix,
    DimensionMismatchError,
    MatrixVerdict,
    SingularMatrixError,
    derivative_matrix,
    diagnose_mmatrix,
    generate_random_problem,
    lu_factorize,
    solve_factored,
)


def e2_derivative(e2, x=(0.5, 0.5)):
    return derivative_matrix(e2, np.array(x))


def random_m_matrix(n, rng):
    """sI - B with B >= 0 and s above every column sum of B."""
    b = rng.uniform(0.0, 1.0, (n, n))
    s = b.sum(axis=0).max() * rng.uniform(1.05, 1.5)
    return s * np.eye(n) - b


def as_derivative(matrix):
    return DerivativeMatrix(np.array(matrix, dtype=float), float("nan"))


class TestLuFactorize:
    def test_identity(self):
        f = lu_factorize(as_derivative(np.eye(3)))
        np.testing.assert_array_equal(f.lower, np.eye(3))
        np.testing.assert_array_equal(f.upper, np.eye(3))
        b = np.array([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(solve_factored(f, b), b)

    def test_e2_closed_form_solve(self, e2):
        f = lu_factorize(e2_derivative(e2))
        d = solve_factored(f, np.array([-0.05, 0.05]))
        np.testing.assert_allclose(d, [-1.0 / 12.0, 1.0 / 12.0], atol=1e-15)

    def test_roundtrip_random_diagonally_dominant(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            f = lu_factorize(as_derivative(random_m_matrix(10, rng)))
            assert f.roundtrip_error() <= 1e-12 * f.norm1

    def test_singular_raises(self, e2):
        # alpha * e^T x = 1/2 makes every column sum to zero
        singular = e2.with_alpha(0.5)
        j = derivative_matrix(singular, np.array([0.5, 0.5]))
        with pytest.raises(SingularMatrixError):
            lu_factorize(j)

    def test_base_point_tag_defaults_to_sum(self, e2):
        f = lu_factorize(e2_derivative(e2))
        assert f.base_point_tag == 1.0
        tagged = lu_factorize(e2_derivative(e2), tag="outer-3")
        assert tagged.base_point_tag == "outer-3"

    def test_rejects_nonsquare(self):
        with pytest.raises(DimensionMismatchError):
            lu_factorize(as_derivative(np.ones((2, 3))))


class TestSolveFactored:
    def test_reuse_many_solves(self, e2):
        f = lu_factorize(e2_derivative(e2))
        j = e2_derivative(e2).matrix
        rng = np.random.default_rng(4)
        for _ in range(10):
            b = rng.standard_normal(2)
            z = solve_factored(f, b)
            assert np.abs(j @ z - b).sum() <= 1e-12 * f.norm1 * max(np.abs(z).sum(), 1.0)

    def test_residual_on_random_m_matrices(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            m = random_m_matrix(50, rng)
            f = lu_factorize(as_derivative(m))
            b = rng.standard_normal(50)
            z = solve_factored(f, b)
            assert np.abs(m @ z - b).sum() <= 1e-12 * f.norm1 * np.abs(z).sum()

    def test_factor_solve_consistency(self):
        rng = np.random.default_rng(6)
        m = random_m_matrix(20, rng)
        f = lu_factorize(as_derivative(m))
        for _ in range(5):
            w = rng.standard_normal(20)
            got = solve_factored(f, m @ w)
            assert np.abs(got - w).sum() <= 1e-10 * np.abs(w).sum()

    def test_matrix_right_hand_side(self):
        rng = np.random.default_rng(7)
        m = random_m_matrix(6, rng)
        f = lu_factorize(as_derivative(m))
        inv = solve_factored(f, np.eye(6))
        np.testing.assert_allclose(m @ inv, np.eye(6), atol=1e-12)

    def test_dimension_mismatch(self, e2):
        f = lu_factorize(e2_derivative(e2))
        with pytest.raises(DimensionMismatchError):
            solve_factored(f, np.ones(3))


class TestDiagnoseMmatrix:
    def test_identity(self):
        d = diagnose_mmatrix(as_derivative(np.eye(4)))
        assert d.verdict is MatrixVerdict.NONSINGULAR_M
        assert d.is_z_matrix
        assert d.column_dominance_margin == pytest.approx(1.0)

    def test_e2_base_point(self, e2):
        d = diagnose_mmatrix(e2_derivative(e2))
        assert d.is_z_matrix
        assert d.column_dominance_margin == pytest.approx(0.2, abs=1e-15)
        assert d.verdict is MatrixVerdict.NONSINGULAR_M

    def test_singular_boundary(self, e2):
        j = derivative_matrix(e2.with_alpha(0.5), np.array([0.5, 0.5]))
        d = diagnose_mmatrix(j)
        assert d.is_z_matrix
        assert d.column_dominance_margin == pytest.approx(0.0, abs=1e-14)
        assert d.verdict is MatrixVerdict.SINGULAR

    def test_positive_offdiagonal_is_indefinite(self):
        d = diagnose_mmatrix(as_derivative([[1.0, 0.2], [-0.1, 1.0]]))
        assert not d.is_z_matrix
        assert d.verdict is MatrixVerdict.INDEFINITE

    def test_z_without_dominance_is_indefinite(self):
        d = diagnose_mmatrix(as_derivative([[0.1, -0.9], [-0.9, 0.1]]))
        assert d.is_z_matrix
        assert d.column_dominance_margin < 0
        assert d.verdict is MatrixVerdict.INDEFINITE

    def test_nonsingular_verdict_implies_nonnegative_inverse(self):
        # certified verdicts must come with entrywise nonnegative inverses
        rng = np.random.default_rng(8)
        for n in (4, 9):
            inst = generate_random_problem(n, n, 0.45)
            x = rng.uniform(0.0, 1.0, n)
            x *= rng.uniform(0.0, 1.0) / x.sum()
            j = derivative_matrix(inst, x)
            assert diagnose_mmatrix(j).verdict is MatrixVerdict.NONSINGULAR_M
            inv = solve_factored(lu_factorize(j), np.eye(n))
            assert inv.min() >= -1e-12

    def test_inverse_comparison_for_nested_points(self):
        # 0 <= z <= x with sum(x) <= 1: inverse at z is entrywise no larger
        n, alpha = 10, 0.45
        inst = generate_random_problem(n, 13, alpha)
        rng = np.random.default_rng(13)
        for _ in range(20):
            x = rng.uniform(0.0, 1.0, n)
            x *= rng.uniform(0.0, 1.0) / x.sum()
            z = rng.uniform(0.0, 1.0, n) * x
            inv_x = solve_factored(lu_factorize(derivative_matrix(inst, x)), np.eye(n))
            inv_z = solve_factored(lu_factorize(derivative_matrix(inst, z)), np.eye(n))
            assert (inv_z <= inv_x + 1e-10).all()
