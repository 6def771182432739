"""
Unit tests for the `classic` module.
"""

from ratnet.approx.classic import (
    MINIMAX_GRID, NEWMAN_MAX, RELU_INIT_TABLE, Family, alternating_extrema,
    approximant_for_budget, best_poly_relu, best_polynomial,
    convergence_table, init_error, minimax_rational, newman_relu,
    table_residuals
)
from ratnet.approx.ratfun import (
    UNIT, Interval, alternation_count, chebyshev_grid, relu, sup_error
)
from ratnet.approx.zolotarev import ReluApproximant
from ratnet.errors import DomainError, NumericError, RangeError
import numpy as np
import unittest


class TestInitTable(unittest.TestCase):
    def test_error_range(self) -> None:
        self.assertGreater(init_error(), 0.021)
        self.assertLess(init_error(), 0.024)

    def test_pole_free(self) -> None:
        # 1 + 2.383 x^2 never vanishes
        self.assertTrue(np.all(np.asarray(RELU_INIT_TABLE.denominator(
            np.linspace(-10.0, 10.0, 1001))) > 0))


class TestNewman(unittest.TestCase):
    def test_error_five(self) -> None:
        error = sup_error(relu, newman_relu(5), UNIT, 100_000).max_abs_error
        self.assertGreater(error, 0.005)
        self.assertLess(error, 0.015)

    def test_param_count(self) -> None:
        self.assertEqual(newman_relu(5).param_count(), 13)

    def test_decreasing(self) -> None:
        errors = [
            sup_error(relu, newman_relu(n), UNIT, 20_001).max_abs_error
            for n in (4, 9, 16, 25)
        ]
        self.assertEqual(errors, sorted(errors, reverse=True))

    def test_limits(self) -> None:
        with self.assertRaises(DomainError):
            newman_relu(3)
        with self.assertRaises(RangeError):
            newman_relu(NEWMAN_MAX + 1)

    def test_abs_part_even(self) -> None:
        newman = newman_relu(16)
        x = np.linspace(0.0, 1.0, 1001)
        np.testing.assert_allclose(newman.abs_part(-x), newman.abs_part(x),
                                   rtol=0.0, atol=1e-12)

    def test_large_order_finite(self) -> None:
        values = newman_relu(NEWMAN_MAX)(np.linspace(-1.0, 1.0, 101))
        self.assertTrue(np.all(np.isfinite(values)))


class TestBestPolynomial(unittest.TestCase):
    def test_degree_one(self) -> None:
        # Best line to ReLU on [-1, 1] is x/2 + 1/4
        best = best_poly_relu(1)
        np.testing.assert_allclose(best.power_coefficients(), [0.25, 0.5],
                                   atol=1e-9)
        self.assertAlmostEqual(best.error, 0.25, places=9)

    def test_degree_thirteen(self) -> None:
        best = best_poly_relu(13)
        self.assertGreater(best.error, 0.010)
        self.assertLess(best.error, 0.013)
        self.assertEqual(best.param_count(), 14)

    def test_algebraic_rate(self) -> None:
        ratio = best_poly_relu(32).error / best_poly_relu(16).error
        self.assertGreaterEqual(ratio, 0.4)
        self.assertLessEqual(ratio, 0.6)

    def test_relu_error_is_half_abs_error(self) -> None:
        # ReLU = (|x| + x) / 2 and x is exact at every degree
        for degree in (4, 7, 10):
            with self.subTest(degree=degree):
                self.assertAlmostEqual(
                    best_poly_relu(degree).error,
                    best_polynomial(np.abs, degree).error / 2.0,
                    places=8
                )

    def test_abs_odd_degree_adds_nothing(self) -> None:
        for m in (2, 3, 4):
            with self.subTest(m=m):
                self.assertAlmostEqual(
                    best_polynomial(np.abs, 2 * m).error,
                    best_polynomial(np.abs, 2 * m + 1).error,
                    places=6
                )

    def test_equioscillation(self) -> None:
        best = best_polynomial(np.exp, 4)
        self.assertEqual(len(best.reference), 6)
        self.assertAlmostEqual(best.level / best.error, 1.0, places=8)

    def test_other_interval(self) -> None:
        interval = Interval(0.0, 2.0)
        best = best_polynomial(np.exp, 3, interval, n_grid=2001)
        x = np.linspace(0.0, 2.0, 11)
        power = np.polynomial.polynomial.polyval(x, best.power_coefficients())
        np.testing.assert_allclose(power, best(x), atol=1e-12)
        self.assertTrue(all(interval.contains(v) for v in best.reference))
        self.assertLess(best.error, 0.02)

    def test_bad_arguments(self) -> None:
        with self.assertRaises(DomainError):
            best_poly_relu(0)
        with self.assertRaises(DomainError):
            best_polynomial(np.exp, 10, n_grid=15)


class TestAlternatingExtrema(unittest.TestCase):
    def test_runs(self) -> None:
        err = np.array([0.1, 0.3, -0.2, -0.5, -0.1, 0.4, 0.0, 0.2])
        np.testing.assert_array_equal(alternating_extrema(err), [1, 3, 5])

    def test_all_zero(self) -> None:
        self.assertEqual(alternating_extrema(np.zeros(5)).size, 0)


class TestMinimaxRational(unittest.TestCase):
    def test_exact_rational(self) -> None:
        result = minimax_rational(lambda x: 1.0 / (2.0 + x), (0, 1))
        self.assertLess(result.error, 1e-10)
        np.testing.assert_allclose(result.rational.denom, [1.0, 0.5],
                                   atol=1e-8)

    def test_relu_type_three_two(self) -> None:
        result = minimax_rational(relu, (3, 2))
        self.assertLess(result.error, 0.025)
        self.assertEqual(result.rational.type()[0], 3)
        self.assertIsNone(result.parity)

    def test_relu_matches_init_table(self) -> None:
        result = minimax_rational(relu, (3, 2))
        residuals = table_residuals(result.rational)
        self.assertLessEqual(residuals['constant_term'], 5e-3)

    def test_relu_alternation(self) -> None:
        # r_P + r_Q + 2 = 7 alternating extrema on the solver grid
        result = minimax_rational(relu, (3, 2))
        x = chebyshev_grid(UNIT, MINIMAX_GRID)
        err = relu(x) - result.rational(x)
        self.assertGreaterEqual(alternation_count(err, 1e-3), 7)

    def test_lawson_without_pole_free_iterate(self) -> None:
        # The exact fit 1 / (x - 0.3001) has its pole inside the interval
        with self.assertRaises(NumericError) as ctx:
            minimax_rational(lambda x: 1.0 / (x - 0.3001), (0, 1))
        self.assertIn('lawson_iterations', ctx.exception.diagnostics)

    def test_even_target(self) -> None:
        result = minimax_rational(np.abs, (2, 2))
        self.assertEqual(result.parity, 'even')
        self.assertEqual(result.rational.numer[1], 0.0)
        self.assertLess(result.error, 0.1)

    def test_residuals(self) -> None:
        residuals = table_residuals(RELU_INIT_TABLE)
        self.assertEqual(residuals['constant_term'], 0.0)
        self.assertAlmostEqual(residuals['unit_norm'], 0.0, places=14)

    def test_bad_type(self) -> None:
        with self.assertRaises(DomainError):
            minimax_rational(relu, (10, 10))


class TestConvergenceTable(unittest.TestCase):
    def test_budget_fourteen(self) -> None:
        # Zolotarev < Newman < best polynomial at 14 parameters
        errors = {
            family: sup_error(
                relu, approximant_for_budget(family, 14), UNIT, 100_000
            ).max_abs_error
            for family in Family
        }
        self.assertLess(errors[Family.ZOLOTAREV], errors[Family.NEWMAN])
        self.assertLess(errors[Family.NEWMAN], errors[Family.BEST_POLY])
        self.assertGreater(errors[Family.ZOLOTAREV], 1e-3)
        self.assertLess(errors[Family.ZOLOTAREV], 4e-3)

    def test_zolotarev_budget(self) -> None:
        approximant = approximant_for_budget(Family.ZOLOTAREV, 20)
        self.assertIsInstance(approximant, ReluApproximant)
        self.assertEqual(approximant.param_count(), 14)
        with self.assertRaises(RangeError):
            approximant_for_budget(Family.ZOLOTAREV, 6)
        with self.assertRaises(RangeError):
            approximant_for_budget(Family.NEWMAN, 10)

    def test_table(self) -> None:
        table = convergence_table('zolotarev', [7, 14, 21, 28], n_grid=20_001)
        self.assertEqual(list(table.columns),
                         ['family', 'param_count', 'sup_error'])
        self.assertEqual(list(table['param_count']), [7, 14, 21, 28])
        self.assertTrue(table['sup_error'].is_monotonic_decreasing)

    def test_duplicate_budgets(self) -> None:
        # Budgets 13 and 14 map to the same Newman order
        table = convergence_table(Family.NEWMAN, [14, 13, 11], n_grid=2001)
        self.assertEqual(list(table['param_count']), [11, 13])


if __name__ == '__main__':
    unittest.main()
