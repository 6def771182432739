"""
Unit tests for the `files` module.
"""

from ratnet.storage.files import frame_to_csv, write_atomic, write_frame
import pandas as pd
import tempfile
import unittest
from pathlib import Path


class TestWriteAtomic(unittest.TestCase):
    def test_creates_parents_and_replaces(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'a' / 'b' / 'out.txt'
            write_atomic(path, 'first\n')
            write_atomic(path, 'second\n')
            self.assertEqual(path.read_text(encoding='utf-8'), 'second\n')
            # No temp files left behind
            self.assertEqual([p.name for p in path.parent.iterdir()], ['out.txt'])


class TestFrames(unittest.TestCase):
    def setUp(self) -> None:
        self.frame = pd.DataFrame({'x': [0.1, 1.0 / 3.0], 'n': [1, 2]})

    def test_full_precision(self) -> None:
        text = frame_to_csv(self.frame)
        self.assertEqual(text.splitlines()[0], 'x,n')
        value = float(text.splitlines()[2].split(',')[0])
        self.assertEqual(value, 1.0 / 3.0)

    def test_write_frame(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = write_frame(self.frame, Path(tmp) / 'frame.csv')
            read = pd.read_csv(path)
        pd.testing.assert_frame_equal(read, self.frame)


if __name__ == '__main__':
    unittest.main()
