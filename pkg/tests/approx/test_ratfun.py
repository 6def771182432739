"""
Unit tests for the `ratfun` module.
"""

from ratnet.approx.ratfun import (
    UNIT, ComposedRational, Interval, RationalFunction, alternation_count,
    chebyshev_grid, eval_composed, pole_check, relu, sup_error
)
from ratnet.approx.classic import RELU_INIT_TABLE
from ratnet.errors import DomainError, EvaluationError
import numpy as np
import unittest


class TestInterval(unittest.TestCase):
    def test_rejects_empty(self) -> None:
        with self.assertRaises(DomainError):
            Interval(1.0, 1.0)

    def test_rejects_infinite(self) -> None:
        with self.assertRaises(DomainError):
            Interval(0.0, float('inf'))

    def test_contains(self) -> None:
        interval = Interval(-2.0, 3.0)
        self.assertTrue(interval.contains(3.0))
        self.assertFalse(interval.contains(3.5))
        self.assertEqual(interval.width, 5.0)


class TestChebyshevGrid(unittest.TestCase):
    def test_endpoints_and_order(self) -> None:
        x = chebyshev_grid(Interval(0.0, 2.0), 101)
        self.assertEqual(x[0], 0.0)
        self.assertEqual(x[-1], 2.0)
        self.assertTrue(np.all(np.diff(x) > 0))

    def test_symmetric(self) -> None:
        # Mirror image of the grid is the grid itself
        x = chebyshev_grid(UNIT, 1001)
        np.testing.assert_array_equal(x, -x[::-1])
        self.assertEqual(x[500], 0.0)


class TestRationalFunction(unittest.TestCase):
    def setUp(self) -> None:
        self.identity = RationalFunction((0.0, 1.0), (1.0,))

    def test_identity(self) -> None:
        self.assertAlmostEqual(self.identity(0.7), 0.7, places=15)

    def test_table_read_highest_first(self) -> None:
        # Coefficients taken literally in ascending order give a0 / b0
        r = RationalFunction((1.1915, 1.5957, 0.5, 0.0218), (2.3830, 0.0, 1.0))
        self.assertAlmostEqual(r(0.0), 0.5, places=12)

    def test_table_init_at_zero(self) -> None:
        self.assertAlmostEqual(RELU_INIT_TABLE(0.0), 0.0218, places=15)

    def test_cancelling_pole(self) -> None:
        # x^2 / x at x = 3
        r = RationalFunction((0.0, 0.0, 1.0), (0.0, 1.0))
        self.assertAlmostEqual(r(3.0), 3.0, places=14)

    def test_scalar_in_scalar_out(self) -> None:
        self.assertIsInstance(self.identity(0.25), float)
        self.assertEqual(self.identity(np.array([0.25])).shape, (1,))

    def test_accounting(self) -> None:
        self.assertEqual(RELU_INIT_TABLE.type(), (3, 2))
        self.assertEqual(RELU_INIT_TABLE.degree(), 3)
        self.assertEqual(RELU_INIT_TABLE.param_count(), 7)

        r = RationalFunction((1.0, 2.0, 3.0), (1.0, 0.0, 1.0))
        self.assertEqual(r.param_count(), 2 * (r.degree() + 1))

    def test_trailing_zero_rejected(self) -> None:
        with self.assertRaises(DomainError):
            RationalFunction((1.0, 0.0), (1.0,))
        with self.assertRaises(DomainError):
            RationalFunction((1.0,), (1.0, 0.0))

    def test_from_coefficients_trims(self) -> None:
        r = RationalFunction.from_coefficients([1.0, 2.0, 0.0], [1.0, 0.0])
        self.assertEqual(r.type(), (1, 0))

    def test_pole_raises_with_location(self) -> None:
        r = RationalFunction((1.0,), (0.0, 1.0))
        with self.assertRaises(EvaluationError) as ctx:
            r(np.array([-1.0, 0.0, 1.0]))
        self.assertEqual(ctx.exception.x, 0.0)

    def test_horner_matches_power_sum(self) -> None:
        # Random coefficient sets of degree <= 10 on |x| <= 2
        rng = np.random.default_rng(7)
        x = rng.uniform(-2.0, 2.0, size=200)
        for degree in range(1, 11):
            numer = rng.standard_normal(degree + 1)
            denom = np.concatenate([[5.0], 0.1 * rng.standard_normal(degree)])
            r = RationalFunction.from_coefficients(numer, denom)
            naive = (
                sum(c * x ** i for i, c in enumerate(numer))
                / sum(c * x ** i for i, c in enumerate(denom))
            )
            np.testing.assert_allclose(r(x), naive, rtol=1e-12, atol=1e-14)

    def test_derivative(self) -> None:
        # d/dx of x / (1 + x^2) is (1 - x^2) / (1 + x^2)^2
        r = RationalFunction((0.0, 1.0), (1.0, 0.0, 1.0))
        x = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(
            r.derivative(x), (1 - x ** 2) / (1 + x ** 2) ** 2, atol=1e-15
        )

    def test_normalized(self) -> None:
        r = RationalFunction((2.0, 4.0), (2.0, 0.0, 6.0)).normalized()
        self.assertEqual(r.denom, (1.0, 0.0, 3.0))
        self.assertEqual(r.numer, (1.0, 2.0))


class TestComposedRational(unittest.TestCase):
    def setUp(self) -> None:
        self.square = RationalFunction((0.0, 0.0, 1.0), (1.0,))

    def test_squares(self) -> None:
        c = ComposedRational((self.square, self.square))
        self.assertEqual(eval_composed(c, 2.0), 16.0)
        self.assertEqual(c.degree(), 4)

    def test_identity_stage(self) -> None:
        c = ComposedRational((RationalFunction((0.0, 1.0), (1.0,)),))
        self.assertEqual(eval_composed(c, -0.3), -0.3)

    def test_empty_rejected(self) -> None:
        with self.assertRaises(DomainError):
            ComposedRational(())

    def test_param_count_is_sum(self) -> None:
        c = ComposedRational((RELU_INIT_TABLE,) * 3)
        self.assertEqual(c.param_count(), 21)
        self.assertEqual(c.degree(), 27)

    def test_expand_matches_stagewise(self) -> None:
        # Two random degree-2 stages with positive denominators
        rng = np.random.default_rng(3)
        stages = tuple(
            RationalFunction.from_coefficients(
                rng.standard_normal(3),
                [2.0 + rng.uniform(), 0.3 * rng.standard_normal(), 1.0]
            )
            for _ in range(2)
        )
        c = ComposedRational(stages)
        x = np.linspace(-1.0, 1.0, 101)
        np.testing.assert_allclose(c.expand()(x), c(x), rtol=1e-10, atol=1e-12)

    def test_stage_index_on_failure(self) -> None:
        # Second stage has a pole at 1 = first stage's value at 1
        inner = RationalFunction((0.0, 1.0), (1.0,))
        outer = RationalFunction((1.0,), (-1.0, 1.0))
        with self.assertRaises(EvaluationError) as ctx:
            ComposedRational((inner, outer))(1.0)
        self.assertEqual(ctx.exception.stage, 1)


class TestPoleCheck(unittest.TestCase):
    def test_positive_quadratic(self) -> None:
        r = RationalFunction((1.0,), (2.3830, 0.0, 1.0))
        self.assertTrue(pole_check(r, UNIT))

    def test_sign_change(self) -> None:
        r = RationalFunction((1.0,), (0.0, 1.0))
        self.assertFalse(pole_check(r, UNIT))

    def test_polynomial(self) -> None:
        r = RationalFunction((1.0, 2.0), (1.0,))
        self.assertTrue(pole_check(r, Interval(-100.0, 100.0)))

    def test_grid_too_small(self) -> None:
        with self.assertRaises(DomainError):
            pole_check(RELU_INIT_TABLE, UNIT, n_grid=1)


class TestSupError(unittest.TestCase):
    def test_identical(self) -> None:
        report = sup_error(relu, relu, UNIT, 1001)
        self.assertEqual(report.max_abs_error, 0.0)
        self.assertEqual(report.grid_size, 1001)

    def test_line_against_zero(self) -> None:
        report = sup_error(lambda x: x, lambda x: 0.0, Interval(0.0, 1.0), 1001)
        self.assertEqual(report.max_abs_error, 1.0)
        self.assertEqual(report.argmax, 1.0)

    def test_symmetric(self) -> None:
        a = sup_error(np.sin, np.cos, UNIT, 2001)
        b = sup_error(np.cos, np.sin, UNIT, 2001)
        self.assertEqual(a.max_abs_error, b.max_abs_error)
        self.assertGreaterEqual(a.max_abs_error, 0.0)

    def test_ties_go_left(self) -> None:
        # |x| peaks at both endpoints
        report = sup_error(np.abs, lambda x: 0.0, UNIT, 101)
        self.assertEqual(report.argmax, -1.0)

    def test_init_table_error(self) -> None:
        report = sup_error(relu, RELU_INIT_TABLE, UNIT, 100_000)
        self.assertGreater(report.max_abs_error, 0.021)
        self.assertLess(report.max_abs_error, 0.024)
        self.assertTrue(UNIT.contains(report.argmax))


class TestAlternationCount(unittest.TestCase):
    def test_cosine(self) -> None:
        # cos(4 arccos x) = T_4 equioscillates at 5 points
        x = chebyshev_grid(UNIT, 10_001)
        self.assertEqual(alternation_count(np.cos(4 * np.arccos(x))), 5)

    def test_zero(self) -> None:
        self.assertEqual(alternation_count(np.zeros(10)), 0)


if __name__ == '__main__':
    unittest.main()
