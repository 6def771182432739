"""
Unit tests for the `taylor` module.
"""

from ratnet.approx.ratfun import Interval
from ratnet.constructive.network import certify
from ratnet.constructive.taylor import (
    TARGETS, TaylorPlan, bump, bump_function, clip_network, grid_size,
    multi_indices, partition_of_unity, taylor_network
)
from ratnet.errors import DomainError
import numpy as np
import os
import unittest


UNIT_SQUARE = Interval(0.0, 1.0)


class TestPlan(unittest.TestCase):
    def test_exp_plan(self) -> None:
        plan = TaylorPlan.create(1, 3, 1e-2)
        self.assertEqual(plan.N, 5)
        self.assertAlmostEqual(plan.delta, 2.5e-3)
        self.assertIsNone(plan.clip_delta)

    def test_two_dimensional_plan(self) -> None:
        plan = TaylorPlan.create(2, 2, 0.1)
        self.assertEqual(plan.N, grid_size(2, 2, 0.1))
        self.assertAlmostEqual(plan.clip_delta, plan.delta / (plan.N + 1) ** 2)

    def test_grid_size_linear(self) -> None:
        self.assertEqual(grid_size(1, 2, 0.1), 5)

    def test_validation(self) -> None:
        with self.assertRaises(DomainError):
            TaylorPlan.create(3, 2, 0.1)
        with self.assertRaises(DomainError):
            TaylorPlan.create(1, 5, 0.1)
        with self.assertRaises(DomainError):
            TaylorPlan.create(1, 2, 1.5)


class TestPartition(unittest.TestCase):
    def setUp(self) -> None:
        self.x = np.linspace(0.0, 1.0, 1001)

    def test_sums_to_one(self) -> None:
        for N in (1, 4, 7):
            with self.subTest(N=N):
                np.testing.assert_allclose(partition_of_unity(self.x, N), 1.0,
                                           atol=1e-12)

    def test_bump_shape(self) -> None:
        N = 4
        self.assertEqual(bump(0.5, 2, N), 1.0)
        self.assertAlmostEqual(float(bump(0.5 + 1 / (3 * N), 2, N)), 1.0)
        self.assertAlmostEqual(float(bump(0.5 + 2 / (3 * N), 2, N)), 0.0)
        self.assertAlmostEqual(float(bump(0.5 + 1.5 / (3 * N), 2, N)), 0.5)

    def test_bump_function_matches(self) -> None:
        for m in (0, 2, 5):
            with self.subTest(m=m):
                g = bump_function(m, 5)
                np.testing.assert_allclose(g(self.x), bump(self.x, m, 5),
                                           atol=1e-12)

    def test_bump_lipschitz(self) -> None:
        # Interior bump: four hinges of slope change 3N
        self.assertAlmostEqual(bump_function(2, 5).lipschitz, 60.0)


class TestClip(unittest.TestCase):
    def test_close_to_min(self) -> None:
        delta = 1e-2
        net = clip_network(delta)
        y = np.linspace(0.0, 1.2, 2001)
        error = np.max(np.abs(net(y) - np.minimum(y, 1.0)))
        self.assertLessEqual(error, (1 + delta) * delta)
        self.assertEqual(net.relay_count(), 1)


class TestMultiIndices(unittest.TestCase):
    def test_graded(self) -> None:
        self.assertEqual(multi_indices(2, 2), [(0, 0), (1, 0), (0, 1)])
        self.assertEqual(multi_indices(1, 3), [(0,), (1,), (2,)])
        self.assertEqual(len(multi_indices(2, 4)), 10)


class TestTaylorNetwork(unittest.TestCase):
    def test_exp(self) -> None:
        target = TARGETS['exp']
        net = taylor_network(target.derivatives, 1, 3, 1e-2)
        report = certify(net, target.function, UNIT_SQUARE, 2001)
        self.assertLessEqual(report.max_abs_error, 1e-2)

    def test_linear(self) -> None:
        target = TARGETS['linear']
        net = taylor_network(target.derivatives, 1, 2, 0.1)
        report = certify(net, target.function, UNIT_SQUARE, 2001)
        self.assertLessEqual(report.max_abs_error, 0.1)

    def test_zero_function(self) -> None:
        net = taylor_network(lambda alpha, point: 0.0, 1, 2, 0.1)
        self.assertEqual(net.size(), 0)
        np.testing.assert_array_equal(net(np.array([0.0, 0.5])), [0.0, 0.0])

    @unittest.skipUnless(os.environ.get('RATNET_SLOW') == '1',
                         'set RATNET_SLOW=1 to build the 2-D network')
    def test_product(self) -> None:
        target = TARGETS['product']
        net = taylor_network(target.derivatives, 2, 2, 0.1)
        report = certify(net, target.function, UNIT_SQUARE, 1681)
        self.assertLessEqual(report.max_abs_error, 0.1)


if __name__ == '__main__':
    unittest.main()
