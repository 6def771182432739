"""
Unit tests for the `builders` module.
"""

from ratnet.approx.ratfun import UNIT, Interval
from ratnet.constructive.builders import (
    PiecewiseLinear, budget_schedule, monomial_network, monomial_radius,
    monomial_size_bound, norm_offenders, piecewise_network, product_gadget,
    random_piecewise, ratify_relu_network, relu_reference
)
from ratnet.constructive.network import (
    RELU, SQUARE, Layer, RationalNetwork, certify, random_relu_network
)
from ratnet.approx.zolotarev import ReluApproximant
from ratnet.errors import DomainError, EvaluationError, PreconditionError
import numpy as np
import unittest


class TestProductGadget(unittest.TestCase):
    def test_exact(self) -> None:
        rng = np.random.default_rng(5)
        points = rng.uniform(-1.0, 1.0, size=(500, 2))
        values = product_gadget().evaluate(points)[:, 0]
        np.testing.assert_allclose(values, points[:, 0] * points[:, 1],
                                   atol=1e-14)

    def test_size(self) -> None:
        gadget = product_gadget()
        self.assertEqual(gadget.size(), 3)
        self.assertEqual(gadget.depth(), 1)


class TestMonomial(unittest.TestCase):
    def setUp(self) -> None:
        self.x = np.random.default_rng(0).uniform(-1.0, 1.0, size=1000)

    def test_nine_is_a_chain(self) -> None:
        # 9 = 100 in base 3: two cube nodes, no product
        net = monomial_network(9)
        self.assertEqual(net.size(), 2)
        self.assertEqual(net.depth(), 2)
        self.assertEqual(monomial_size_bound(9, 3), 21)
        np.testing.assert_allclose(net(self.x), self.x ** 9, atol=1e-15)

    def test_eleven(self) -> None:
        net = monomial_network(11)
        self.assertEqual(net.size(), 6)
        np.testing.assert_allclose(net(self.x), self.x ** 11, atol=1e-14)

    def test_relative_error_and_size(self) -> None:
        for n in range(1, 41):
            for r_p in (2, 3):
                with self.subTest(n=n, r_p=r_p):
                    net = monomial_network(n, r_p)
                    expected = self.x ** n
                    error = np.max(np.abs(net(self.x) - expected))
                    self.assertLessEqual(
                        error, 1e-10 * max(np.max(np.abs(expected)), 1e-300)
                    )
                    if n > 1:
                        self.assertLessEqual(net.size(),
                                             monomial_size_bound(n, r_p))

    def test_high_degrees_on_wide_interval(self) -> None:
        x = np.append(np.linspace(-2.0, 2.0, 4001), 1.9968)
        for n in (53, 79, 80, 242):
            with self.subTest(n=n):
                net = monomial_network(n, 3)
                expected = x ** n
                error = np.max(np.abs(net(x) - expected))
                self.assertLessEqual(error, 1e-10 * np.max(np.abs(expected)))
                self.assertLessEqual(net.size(), monomial_size_bound(n, 3))

    def test_unbalanced_digits_climb_binary_ladder(self) -> None:
        # 80 = 2222 in base 3 would multiply x^26 by x^54
        self.assertEqual(monomial_network(80).size(), 17)
        self.assertEqual(monomial_network(79).size(), 19)
        self.assertEqual(monomial_network(242).size(), 20)

    def test_radius(self) -> None:
        for n in (53, 80):
            with self.subTest(n=n):
                net = monomial_network(n)
                radius = monomial_radius(n)
                x = np.array([-radius, radius])
                self.assertTrue(np.all(np.isfinite(net(x))))
                with np.errstate(over='ignore', invalid='ignore'):
                    with self.assertRaises(EvaluationError):
                        net(100.0 * x)
        with self.assertRaises(DomainError):
            monomial_radius(0)

    def test_base_two_uses_squares(self) -> None:
        net = monomial_network(4, 2)
        self.assertTrue(all(
            a is SQUARE for layer in net.layers for a in layer.activations
        ))

    def test_bad_arguments(self) -> None:
        with self.assertRaises(DomainError):
            monomial_network(0)
        with self.assertRaises(DomainError):
            monomial_network(5, 1)


class TestPiecewiseLinear(unittest.TestCase):
    def test_from_knots_interpolates(self) -> None:
        xs = [0.0, 0.2, 0.5, 1.0]
        ys = [0.3, -0.1, 0.4, 0.4]
        g = PiecewiseLinear.from_knots(xs, ys)
        np.testing.assert_allclose(g(np.array(xs)), ys, atol=1e-15)
        self.assertEqual(g.breakpoints, (0.2, 0.5))
        # Slopes -2, 5/3, 0; hinge coefficients 5/3 and -5/3
        self.assertAlmostEqual(g.lipschitz, 10.0 / 3.0)

    def test_two_knots(self) -> None:
        g = PiecewiseLinear.from_knots([0.0, 1.0], [1.0, -1.0])
        np.testing.assert_allclose(g(np.array([0.0, 0.5, 1.0])),
                                   [1.0, 0.0, -1.0])
        self.assertEqual(g.lipschitz, 2.0)

    def test_validation(self) -> None:
        with self.assertRaises(DomainError):
            PiecewiseLinear((0.5, 0.2), (0.0, 0.1, 0.1, 0.0), 1.0)
        with self.assertRaises(DomainError):
            PiecewiseLinear((0.5,), (0.0, 0.1), 1.0)
        with self.assertRaises(DomainError):
            PiecewiseLinear((0.5,), (0.0, 3.0, 0.0), 1.0)
        with self.assertRaises(DomainError):
            PiecewiseLinear.from_knots([0.1, 1.0], [0.0, 1.0])


class TestPiecewiseNetwork(unittest.TestCase):
    def test_within_tolerance(self) -> None:
        rng = np.random.default_rng(21)
        for epsilon in (1e-1, 1e-3):
            with self.subTest(epsilon=epsilon):
                g = random_piecewise(5, 3.0, rng)
                net = piecewise_network(g, epsilon)
                report = certify(net, lambda p: g(p[:, 0]),
                                 Interval(0.0, 1.0), 20_001)
                self.assertLessEqual(report.max_abs_error, epsilon)
                self.assertEqual(net.depth(), 1)

    def test_hinge_tolerance(self) -> None:
        g = PiecewiseLinear((0.5,), (0.0, 2.0, 0.0), 2.0)
        net = piecewise_network(g, 0.04)
        approximant = net.layers[0].activations[0]
        self.assertIsInstance(approximant, ReluApproximant)
        self.assertAlmostEqual(approximant.epsilon, 0.01)
        self.assertEqual(net.size(), approximant.node_count())

    def test_constant(self) -> None:
        g = PiecewiseLinear((0.5,), (0.0, 0.0, 0.7), 1.0)
        net = piecewise_network(g, 0.01)
        self.assertEqual(net.size(), 0)
        np.testing.assert_allclose(net(np.array([0.0, 1.0])), [0.7, 0.7])

    def test_tolerance_range(self) -> None:
        g = PiecewiseLinear((0.5,), (0.0, 1.0, 0.0), 1.0)
        with self.assertRaises(DomainError):
            piecewise_network(g, 0.0)


class TestBudgetSchedule(unittest.TestCase):
    def test_flat(self) -> None:
        self.assertEqual(budget_schedule(0.1, 2), [0.05, 0.05])

    def test_geometric(self) -> None:
        budgets = budget_schedule(0.3, 3, 'geometric', 2.0)
        np.testing.assert_allclose(budgets, [0.025, 0.05, 0.1])

    def test_bad_schedule(self) -> None:
        with self.assertRaises(DomainError):
            budget_schedule(0.1, 0)
        with self.assertRaises(DomainError):
            budget_schedule(0.1, 2, 'harmonic')  # type: ignore[arg-type]


class TestRatify(unittest.TestCase):
    def setUp(self) -> None:
        self.rng = np.random.default_rng(2024)

    def test_two_layers(self) -> None:
        f = random_relu_network([1, 3, 3, 1], self.rng)
        net = ratify_relu_network(f, 0.1)
        for layer in net.layers:
            approximant = layer.activations[0]
            self.assertTrue(all(a is approximant for a in layer.activations))
            self.assertEqual(approximant.epsilon, 0.05)
            self.assertEqual(approximant.stages, 2)

        report = certify(net, relu_reference(f).evaluate, UNIT, 10_001)
        self.assertLessEqual(report.max_abs_error, 0.1)

    def test_two_inputs(self) -> None:
        f = random_relu_network([2, 4, 1], self.rng)
        net = ratify_relu_network(f, 1e-3)
        report = certify(net, f.evaluate, UNIT, 2_500, n_random=500,
                         rng=self.rng)
        self.assertLessEqual(report.max_abs_error, 1e-3)

    def test_norm_violation(self) -> None:
        layer = Layer(np.array([[0.9], [0.5]]), np.array([0.2, 0.1]),
                      (RELU, RELU))
        f = RationalNetwork(1, (layer,), np.array([[0.5, 0.5]]), [0.0])
        [(index, node, norm)] = norm_offenders(f)
        self.assertEqual((index, node), (0, 0))
        self.assertAlmostEqual(norm, 1.1)
        with self.assertRaises(PreconditionError) as ctx:
            ratify_relu_network(f, 0.1)
        self.assertEqual(len(ctx.exception.offenders), 1)

    def test_output_map_reported(self) -> None:
        layer = Layer(np.array([[0.5]]), np.array([0.0]), (RELU,))
        f = RationalNetwork(1, (layer,), np.array([[2.0]]), [0.0])
        self.assertEqual(norm_offenders(f), [(1, 0, 2.0)])

    def test_not_relu(self) -> None:
        layer = Layer(np.array([[0.5]]), np.array([0.0]), (SQUARE,))
        f = RationalNetwork(1, (layer,), np.array([[0.5]]), [0.0])
        with self.assertRaises(DomainError):
            ratify_relu_network(f, 0.1)


if __name__ == '__main__':
    unittest.main()
