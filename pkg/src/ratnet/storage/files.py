import os
import tempfile
from pathlib import Path

import pandas as pd

from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

FLOAT_FORMAT = '%.17g'


def write_atomic(path: str | Path, text: str) -> Path:
    """
    Write `text` to a temp file next to `path`, then rename it into place.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp = tempfile.mkstemp(
        dir=target.parent, prefix=f'.{target.name}.', suffix='.tmp'
    )
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise

    logger.debug(f'Wrote {len(text)} characters to {target}')
    return target


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(
        index=False, float_format=FLOAT_FORMAT, lineterminator='\n'
    )


def write_frame(frame: pd.DataFrame, path: str | Path) -> Path:
    return write_atomic(path, frame_to_csv(frame))
