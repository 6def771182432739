"""
Console output helpers.
"""

from typing import Any, Sequence

import pandas as pd
from tabulate import tabulate

from ratnet import __version__


# ASCII art generated from https://patorjk.com/software/taag
LOGO = r"""
           _              _
 _ __ __ _| |_ _ __   ___| |_
| '__/ _` | __| '_ \ / _ \ __|
| | | (_| | |_| | | |  __/ |_
|_|  \__,_|\__|_| |_|\___|\__|
""".rstrip()

TAGLINE = 'Rational neural networks: construction, certification, training'

TABLE_FORMAT = 'fancy_grid'


def show_header() -> None:
    print(LOGO)
    print(f'\n{TAGLINE}')
    print(f'Version: {__version__}\n')


def show_table(frame: pd.DataFrame, floatfmt: str = '.6g') -> None:
    print(tabulate(
        frame,
        showindex=False,
        headers='keys',
        tablefmt=TABLE_FORMAT,
        floatfmt=floatfmt
    ))


def show_summary(rows: Sequence[tuple[str, Any]]) -> None:
    """
    Two-column key/value table.
    """
    show_table(pd.DataFrame(rows, columns=['Quantity', 'Value']))
