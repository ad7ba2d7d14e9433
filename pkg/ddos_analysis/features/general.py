import logging
from enum import Enum
from typing import Hashable, List, Sequence, Union

import numpy as np
import pandas as pd

from ddos_analysis.attack import LabeledDataset
from ddos_analysis.exceptions import ConfigurationError, PipelineError

logger = logging.getLogger(__name__)

KEY_COLUMNS = ["NODE", "TIME"]
LABEL_COLUMN = "ATTACKED"
OWN_VOLUME = "P_OWN"


class ArchitectureKind(str, Enum):
    """
    Detector architecture: multiple models (one per node) or one model, with
    or without the packet volumes of other nodes.
    """

    MM_WC = "MM-WC"
    MM_NC = "MM-NC"
    OM_WC = "OM-WC"
    OM_NC = "OM-NC"

    @property
    def multiple_models(self) -> bool:
        return self in (ArchitectureKind.MM_WC, ArchitectureKind.MM_NC)

    @property
    def with_correlation(self) -> bool:
        return self in (ArchitectureKind.MM_WC, ArchitectureKind.OM_WC)

    @classmethod
    def parse(cls, value: Union[str, "ArchitectureKind"]) -> "ArchitectureKind":
        try:
            return cls(str(getattr(value, "value", value)).upper().replace("_", "-"))
        except ValueError as exc:
            raise ConfigurationError(f"Unknown architecture {value!r}, choose from {[k.value for k in cls]}") from exc


def onehot_column(node: Hashable) -> str:
    return f"N_{node}"


def volume_column(node: Hashable) -> str:
    return f"P_{node}"


def build_general(labeled: LabeledDataset) -> pd.DataFrame:
    """
    Build the general training dataset.

    One record per (node, timestep) carrying the node's one-hot code
    ``N_<id>``, the packet volume of every node at that timestep ``P_<id>``
    and the attack label. Records are sorted by NODE then TIME.

    Args:
        labeled (LabeledDataset): complete labeled dataset.

    Returns:
        pd.DataFrame: NODE, TIME, N_* (int8), P_* (float64), ATTACKED.

    Raises:
        PipelineError: missing or duplicated (node, timestep) cells.
    """
    labeled.check_complete()
    nodes = labeled.nodes
    volumes = labeled.volume_matrix()
    labels = labeled.label_matrix()
    if volumes.isna().to_numpy().any():
        raise PipelineError("Labeled dataset has missing (NODE, TIME) cells")
    n_nodes, n_times = len(nodes), len(volumes.index)
    node_codes = np.repeat(np.arange(n_nodes), n_times)

    columns = {
        "NODE": np.repeat(np.asarray(nodes), n_times),
        "TIME": np.tile(volumes.index.to_numpy(dtype="datetime64[ns]"), n_nodes),
    }
    onehot = np.eye(n_nodes, dtype=np.int8)[node_codes]
    columns.update({onehot_column(node): onehot[:, i] for i, node in enumerate(nodes)})
    tiled = np.tile(volumes.to_numpy(dtype=np.float64), (n_nodes, 1))
    columns.update({volume_column(node): tiled[:, i] for i, node in enumerate(nodes)})
    columns[LABEL_COLUMN] = labels.to_numpy(dtype=bool).T.reshape(-1)
    general = pd.DataFrame(columns)
    logger.info("general training dataset: %d records, %d nodes", len(general), n_nodes)
    return general


def _onehot_nodes(general: pd.DataFrame):
    nodes = list(pd.unique(general["NODE"]))
    for node in nodes:
        if onehot_column(node) not in general.columns:
            raise PipelineError(f"General training dataset has no one-hot column for node {node}")
        yield onehot_column(node), node


def feature_columns(rows: pd.DataFrame) -> List[str]:
    """
    Feature column names of a feature table, in order.
    """
    return [column for column in rows.columns if column not in KEY_COLUMNS and column != LABEL_COLUMN]


def _kept_order(nodes: Sequence[Hashable], kept_nodes: Union[Sequence[Hashable], None], first: Union[Hashable, None]) -> list:
    if kept_nodes is None:
        kept = list(nodes)
    else:
        kept = list(dict.fromkeys(kept_nodes))
        unknown = [node for node in kept if node not in set(nodes)]
        if unknown:
            raise ConfigurationError(f"Kept nodes {unknown} are not in the dataset")
    if first is not None:
        kept = [first] + [node for node in kept if node != first]
    return kept


def select_features(
    general: pd.DataFrame,
    arch: Union[ArchitectureKind, str],
    target_node: Union[Hashable, None] = None,
    kept_nodes: Union[Sequence[Hashable], None] = None,
) -> pd.DataFrame:
    """
    Architecture-specific feature rows from the general training dataset.

    * MM-NC: the target node's own volume.
    * MM-WC: the target's volume first, then the kept nodes' volumes.
    * OM-NC: each node's own volume plus the one-hot code.
    * OM-WC: all (or kept) nodes' volumes plus the one-hot code.

    MM variants only emit the target node's rows; OM variants emit every
    node's rows. ``kept_nodes`` is ignored by NC variants.

    Args:
        general (pd.DataFrame): output of :func:`build_general`.
        arch (ArchitectureKind): detector architecture.
        target_node: node of an MM detector.
        kept_nodes (Sequence, optional): nodes whose volumes are shared, all nodes when omitted.

    Returns:
        pd.DataFrame: NODE, TIME, feature columns, ATTACKED.

    Raises:
        ConfigurationError: missing or unknown target node, unknown kept nodes.
    """
    arch = ArchitectureKind.parse(arch)
    nodes = [node for _, node in _onehot_nodes(general)]
    if arch.multiple_models:
        if target_node is None:
            raise ConfigurationError(f"{arch.value} needs a target node")
        if target_node not in set(nodes):
            raise ConfigurationError(f"Target node {target_node} is not in the dataset")
        rows = general[general["NODE"] == target_node]
        if arch is ArchitectureKind.MM_NC:
            features = [volume_column(target_node)]
        else:
            features = [volume_column(node) for node in _kept_order(nodes, kept_nodes, target_node)]
        table = rows[KEY_COLUMNS + features + [LABEL_COLUMN]]
    else:
        onehot = [onehot_column(node) for node in nodes]
        if arch is ArchitectureKind.OM_NC:
            volumes = general[[volume_column(node) for node in nodes]].to_numpy()
            codes = general[onehot].to_numpy().argmax(axis=1)
            own = pd.Series(volumes[np.arange(len(general)), codes], index=general.index, name=OWN_VOLUME)
            table = pd.concat([general[KEY_COLUMNS], own, general[onehot + [LABEL_COLUMN]]], axis=1)
        else:
            features = [volume_column(node) for node in _kept_order(nodes, kept_nodes, None)]
            table = general[KEY_COLUMNS + features + onehot + [LABEL_COLUMN]]
    table = table.reset_index(drop=True)
    logger.debug("%s features for %s: width %d", arch.value, target_node, len(feature_columns(table)))
    return table
