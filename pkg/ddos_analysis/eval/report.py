import json
import logging
import math
import os
from pathlib import Path
from typing import Mapping, Union

import numpy as np
import pandas as pd

from ddos_analysis.utils.files import atomic_path, atomic_write

logger = logging.getLogger(__name__)


def plain(value):
    """
    JSON-ready copy of a nested report: numpy scalars unwrapped, NaN as null.
    """
    if isinstance(value, Mapping):
        return {str(key): plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(item) for item in value]
    if isinstance(value, pd.DataFrame):
        return plain(value.to_dict(orient="records"))
    if isinstance(value, (pd.Timestamp, np.datetime64)):
        return pd.Timestamp(value).isoformat()
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_report(report: Mapping, path: Union[str, os.PathLike]) -> Path:
    """
    Write a report as indented JSON with sorted keys.
    """
    path = Path(path)
    with atomic_write(path) as handle:
        json.dump(plain(report), handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write("\n")
    logger.info("wrote report %s", path)
    return path


def write_table(frame: pd.DataFrame, path: Union[str, os.PathLike]) -> Path:
    """
    Write a plot-data or per-k table as CSV without its index.
    """
    path = Path(path)
    with atomic_path(path) as tmp:
        frame.to_csv(tmp, index=False, float_format="%.10g")
    logger.debug("wrote table %s (%d rows)", path, len(frame))
    return path
