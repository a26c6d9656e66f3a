import numpy as np
import pytest

from mlpr import (
    DimensionMismatchError,
    InvalidAlphaError,
    ProblemInstance,
    SingularDenominatorError,
    derivative_matrix,
    evaluate_point,
    flatten_tensor,
    generate_random_problem,
    lu_factorize,
    nres,
    predicted_sum,
    residual,
    second_derivative_apply,
    solve_factored,
)

from oracles import (
    E2_ALPHA,
    E2_XSTAR,
    brute_bilinear,
    brute_derivative,
    e2_cube,
    random_stochastic_cube,
    raw_fixed_point,
)


def rand_instance(n, seed, alpha):
    return generate_random_problem(n, seed, alpha)


class TestResidual:
    def test_zero_point(self, e2):
        r = residual(e2, np.zeros(2))
        np.testing.assert_allclose(r.vector, [-0.3, -0.3], atol=1e-15)
        assert abs(r.sum + 0.6) <= 1e-15

    def test_half_point(self, e2):
        x = np.array([0.5, 0.5])
        r = residual(e2, x)
        np.testing.assert_allclose(r.vector, [0.05, -0.05], atol=1e-15)
        # independent quadruple-sum route
        expected = x - E2_ALPHA * brute_bilinear(e2_cube(), x, x) - 0.6 * e2.v
        np.testing.assert_allclose(r.vector, expected, atol=1e-15)

    def test_closed_form_root(self, e2):
        r = residual(e2, E2_XSTAR)
        assert np.abs(r.vector).sum() <= 1e-10
        # cross-check the root itself with a long raw fixed-point run
        limit = raw_fixed_point(e2.tensor.entries, E2_ALPHA, e2.v, 2000)
        np.testing.assert_allclose(limit, E2_XSTAR, atol=1e-12)

    def test_sum_matches_vector(self):
        inst = rand_instance(7, 1, 0.45)
        rng = np.random.default_rng(2)
        for _ in range(5):
            r = residual(inst, rng.uniform(0.0, 1.0, 7))
            assert abs(r.sum - r.vector.sum()) <= 1e-13 * 7

    def test_dimension_mismatch(self, e2):
        with pytest.raises(DimensionMismatchError):
            residual(e2, np.zeros(3))

    def test_requires_alpha(self):
        inst = generate_random_problem(3, 1)  # no alpha attached
        with pytest.raises(InvalidAlphaError):
            residual(inst, np.zeros(3))


class TestDerivativeMatrix:
    def test_identity_at_zero(self, e2):
        d = derivative_matrix(e2, np.zeros(2))
        np.testing.assert_array_equal(d.matrix, np.eye(2))
        assert d.base_point_sum == 0.0

    def test_e2_hand_values(self, e2):
        d = derivative_matrix(e2, np.array([0.5, 0.5]))
        np.testing.assert_allclose(d.matrix, [[0.5, -0.1], [-0.3, 0.3]], atol=1e-15)
        assert d.base_point_sum == 1.0

    @pytest.mark.parametrize("n,seed", [(2, 0), (4, 1), (6, 2)])
    def test_matches_unit_vector_assembly(self, n, seed):
        p = random_stochastic_cube(n, seed)
        inst = ProblemInstance(flatten_tensor(p), 0.45, np.full(n, 1.0 / n))
        rng = np.random.default_rng(seed)
        x = rng.uniform(0.0, 0.2, n)
        got = derivative_matrix(inst, x).matrix
        np.testing.assert_allclose(got, brute_derivative(p, 0.45, x), atol=1e-13)

    @pytest.mark.parametrize("n", [3, 8])
    def test_column_sum_law(self, n):
        inst = rand_instance(n, n, 0.4)
        rng = np.random.default_rng(n + 1)
        for x in (rng.uniform(0, 0.3, n), rng.standard_normal(n)):
            cols = derivative_matrix(inst, x).matrix.sum(axis=0)
            np.testing.assert_allclose(cols, 1.0 - 2 * 0.4 * x.sum(), atol=1e-12)

    def test_e2_column_sums(self, e2):
        cols = derivative_matrix(e2, np.array([0.5, 0.5])).matrix.sum(axis=0)
        np.testing.assert_allclose(cols, 0.2, atol=1e-15)

    def test_z_matrix_for_nonnegative_point(self):
        inst = rand_instance(6, 3, 0.49)
        rng = np.random.default_rng(4)
        m = derivative_matrix(inst, rng.uniform(0, 0.16, 6)).matrix
        off = m - np.diag(np.diag(m))
        assert off.max() <= 1e-14


class TestSecondDerivative:
    def test_zero_argument(self, e2):
        out = second_derivative_apply(e2, np.zeros(2), np.ones(2))
        np.testing.assert_array_equal(out, np.zeros(2))

    def test_e2_value(self, e2):
        z = np.array([0.5, 0.5])
        np.testing.assert_allclose(
            second_derivative_apply(e2, z, z), [-0.3, -0.5], atol=1e-15
        )

    def test_symmetric_in_arguments(self):
        inst = rand_instance(5, 5, 0.3)
        rng = np.random.default_rng(6)
        z1, z2 = rng.standard_normal(5), rng.standard_normal(5)
        np.testing.assert_array_equal(
            second_derivative_apply(inst, z1, z2),
            second_derivative_apply(inst, z2, z1),
        )

    def test_taylor_identity_exact(self):
        # F is a quadratic polynomial, so the second-order expansion is exact
        inst = rand_instance(5, 8, 0.45)
        rng = np.random.default_rng(8)
        for _ in range(5):
            x, h = rng.uniform(0, 0.5, 5), rng.uniform(-0.5, 0.5, 5)
            lhs = residual(inst, x + h).vector
            rhs = (
                residual(inst, x).vector
                + derivative_matrix(inst, x).matrix @ h
                + 0.5 * second_derivative_apply(inst, h, h)
            )
            assert np.abs(lhs - rhs).max() <= 1e-13


class TestFiniteDifferenceConsistency:
    @pytest.mark.parametrize("n", [3, 5, 10])
    def test_derivative_matches_difference_quotient(self, n):
        inst = rand_instance(n, n + 20, 0.45)
        rng = np.random.default_rng(n)
        eps = 1e-7
        for _ in range(3):
            x, h = rng.uniform(0, 0.3, n), rng.standard_normal(n)
            jh = derivative_matrix(inst, x).matrix @ h
            diff = (residual(inst, x + eps * h).vector - residual(inst, x).vector) / eps
            rel = np.abs(diff - jh).sum() / max(np.abs(jh).sum(), 1e-30)
            assert rel <= 1e-6


class TestPredictedSum:
    def test_sum_one_cancellation(self):
        for alpha in (0.1, 0.3, 0.45):
            assert predicted_sum(alpha, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_zero_sum(self):
        assert predicted_sum(0.4, 0.0) == pytest.approx(0.6, abs=1e-16)

    def test_known_fraction(self):
        # (1 - 0.4 - 0.4*0.36) / (1 - 0.48) = 0.456 / 0.52
        assert predicted_sum(0.4, 0.6) == pytest.approx(0.456 / 0.52, abs=1e-15)

    def test_matches_actual_newton_step(self):
        n, alpha = 8, 0.4
        inst = rand_instance(n, 31, alpha)
        rng = np.random.default_rng(31)
        x = rng.uniform(0.0, 1.0, n)
        x *= 0.6 / x.sum()  # nonnegative with entry sum exactly scaled
        f = residual(inst, x)
        step = solve_factored(lu_factorize(derivative_matrix(inst, x)), -f.vector)
        y = x + step
        assert abs(y.sum() - predicted_sum(alpha, x.sum())) <= 1e-11

    def test_singular_denominator(self):
        with pytest.raises(SingularDenominatorError):
            predicted_sum(0.5, 1.0)


class TestNres:
    def test_at_zero_is_one(self, e2):
        assert nres(e2, np.zeros(2)) == pytest.approx(1.0, abs=1e-15)

    def test_at_root_vanishes(self, e2):
        assert nres(e2, E2_XSTAR) <= 1e-10

    def test_positive_off_solution(self, e2):
        assert nres(e2, np.array([0.2, 0.2])) > 0.0

    def test_point_evaluation_bundles_consistently(self, e2):
        x = np.array([0.3, 0.4])
        pe = evaluate_point(e2, x)
        np.testing.assert_array_equal(pe.residual.vector, residual(e2, x).vector)
        assert pe.nres == nres(e2, x)


class TestSumIdentityInvariant:
    def test_newton_step_sums(self):
        # twenty random valid points: 0 <= x, sum <= 1, alpha < 1/2
        n, alpha = 10, 0.45
        inst = rand_instance(n, 77, alpha)
        rng = np.random.default_rng(77)
        for _ in range(20):
            x = rng.uniform(0.0, 1.0, n)
            x *= rng.uniform(0.0, 1.0) / x.sum()
            f = residual(inst, x)
            d = solve_factored(lu_factorize(derivative_matrix(inst, x)), -f.vector)
            assert abs((x + d).sum() - predicted_sum(alpha, x.sum())) <= 1e-11
