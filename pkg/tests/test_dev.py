"""
Unit tests for the `dev.cli` module.
"""

from ratnet.constructive.builders import monomial_network
from ratnet.dev.cli import clear_logs, describe, inspect
from ratnet.nn.model import DenseRationalNet
from ratnet.storage import save_network
import contextlib
import io
import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock


def _enter_context(case: unittest.TestCase, cm):
    """Python 3.10 stand-in for ``TestCase.enterContext`` (3.11+)."""
    result = cm.__enter__()
    case.addCleanup(cm.__exit__, None, None, None)
    return result


class TestDescribe(unittest.TestCase):
    def test_dense(self) -> None:
        rows = dict(describe(DenseRationalNet.initialize((2, 4, 1), 'rational')))
        self.assertEqual(rows['network'], 'dense')
        self.assertEqual(rows['widths'], [2, 4, 1])
        self.assertEqual(rows['params'], 4 * 2 + 4 + 4 + 1 + 7)

    def test_graph(self) -> None:
        net = monomial_network(9, 3)
        rows = dict(describe(net))
        self.assertEqual(rows['network'], 'graph')
        self.assertEqual(rows['size'], net.size())
        self.assertEqual(rows['activations'], 'RationalFunction')


class TestCommands(unittest.TestCase):
    def setUp(self) -> None:
        self.tmp = Path(_enter_context(self, tempfile.TemporaryDirectory()))
        _enter_context(self, mock.patch.dict(
            os.environ, {'RATNET_LOG_DIR': str(self.tmp / 'logs')}
        ))
        _enter_context(self, contextlib.redirect_stdout(io.StringIO()))

    def test_inspect(self) -> None:
        path = save_network(monomial_network(9, 3), self.tmp / 'net.txt')
        self.assertTrue(inspect(str(path)))
        self.assertFalse(inspect(str(self.tmp / 'absent.txt')))

    def test_clear_logs(self) -> None:
        self.assertTrue(clear_logs())
        logs = self.tmp / 'logs'
        logs.mkdir()
        (logs / 'ratnet.log').write_text('x', encoding='utf-8')
        (logs / 'ratnet.log.2026-01-01').write_text('x', encoding='utf-8')
        (logs / 'other.txt').write_text('x', encoding='utf-8')
        self.assertTrue(clear_logs())
        self.assertEqual([p.name for p in logs.iterdir()], ['other.txt'])


if __name__ == '__main__':
    unittest.main()
