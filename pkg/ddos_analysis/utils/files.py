import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


@contextmanager
def atomic_path(path: PathLike) -> Iterator[Path]:
    """
    Yield a temporary path next to ``path``; it replaces ``path`` only if the block succeeds.

    Use it with writers that want a file name (``DataFrame.to_csv``, ``numpy.save``).
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    os.close(fd)
    tmp = Path(tmp_name)
    try:
        yield tmp
        os.replace(tmp, target)
        logger.debug("wrote %s", target)
    finally:
        if tmp.exists():
            tmp.unlink()


@contextmanager
def atomic_write(path: PathLike, mode: str = "w", encoding: Union[str, None] = "utf-8") -> Iterator[IO]:
    """
    Open a temporary file for writing and rename it over ``path`` on success.

    Args:
        path (str, PathLike): final destination.
        mode (str): ``"w"`` for text or ``"wb"`` for binary output.
        encoding (str, optional): text encoding, ignored for binary mode.
    """
    with atomic_path(path) as tmp:
        kwargs = {} if "b" in mode else {"encoding": encoding, "newline": ""}
        with open(tmp, mode, **kwargs) as handle:
            yield handle
