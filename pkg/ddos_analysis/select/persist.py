import json
import logging
import os
import re
from typing import Dict, Hashable, List, Union

from ddos_analysis.utils.files import atomic_write

logger = logging.getLogger(__name__)

_INTEGER = re.compile(r"^-?\d+$")


def _node_id(value: Union[str, int]) -> Hashable:
    if isinstance(value, str) and _INTEGER.match(value):
        return int(value)
    return value


def save_selection(selection: Dict[Hashable, List], path: Union[str, os.PathLike]) -> None:
    """
    Write kept-node sets as JSON ``{target: [kept, ...]}``.

    Values may also be lists of kept sets, one per random trial.
    """

    def convert(value):
        if isinstance(value, (list, tuple)):
            return [convert(item) for item in value]
        return value.item() if hasattr(value, "item") else value

    record = {str(target): convert(kept) for target, kept in selection.items()}
    with atomic_write(path) as handle:
        json.dump(record, handle, indent=2)
    logger.info("wrote %d node selections to %s", len(record), path)


def load_selection(path: Union[str, os.PathLike]) -> Dict[Hashable, List]:
    """
    Read kept-node sets written by :func:`save_selection`; integer identifiers are restored.
    """

    def convert(value):
        if isinstance(value, list):
            return [convert(item) for item in value]
        return _node_id(value)

    with open(path, encoding="utf-8") as handle:
        record = json.load(handle)
    return {_node_id(target): convert(kept) for target, kept in record.items()}
