"""
Unit tests for the `targets` module.
"""

from ratnet.errors import ConfigError, DomainError
from ratnet.nn.targets import TARGETS, get_target, make_dataset
import numpy as np
import unittest


class TestTargets(unittest.TestCase):
    def test_sin2d_physical_box(self) -> None:
        target = get_target('sin2d')
        corners = np.array([[-1.0, -1.0], [1.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(target.to_physical(corners),
                                   [[-20.0, 0.0], [20.0, 40.0], [0.0, 20.0]])

    def test_sin2d_values(self) -> None:
        # x = 10, t = 0 gives -sin(pi / 2) cos(0) = -1
        target = get_target('sin2d')
        value = target(np.array([[0.5, -1.0]]))
        np.testing.assert_allclose(value, [-1.0])

    def test_tanh1d(self) -> None:
        target = TARGETS['tanh1d']
        self.assertEqual(target.dim, 1)
        np.testing.assert_allclose(target(np.array([[0.5]])), [np.tanh(1.5)])

    def test_unknown(self) -> None:
        with self.assertRaises(ConfigError):
            get_target('cos3d')


class TestMakeDataset(unittest.TestCase):
    def test_shapes_and_range(self) -> None:
        inputs, targets = make_dataset('sin2d', 100, np.random.default_rng(0))
        self.assertEqual(inputs.shape, (100, 2))
        self.assertEqual(targets.shape, (100, 1))
        self.assertTrue(np.all(np.abs(inputs) <= 1.0))
        self.assertTrue(np.all(np.abs(targets) <= 1.0))

    def test_seeded(self) -> None:
        a = make_dataset('tanh1d', 10, np.random.default_rng(7))
        b = make_dataset('tanh1d', 10, np.random.default_rng(7))
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_empty(self) -> None:
        with self.assertRaises(DomainError):
            make_dataset('tanh1d', 0, np.random.default_rng(0))


if __name__ == '__main__':
    unittest.main()
