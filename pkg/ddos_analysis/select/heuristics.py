import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Hashable, List, Mapping, Sequence, Union

import numpy as np
import pandas as pd

from ddos_analysis.exceptions import ConfigurationError, InputError
from ddos_analysis.utils.seeding import make_rng

logger = logging.getLogger(__name__)

# scores are ranked at this precision, equal scores by node id
RANK_DECIMALS = 12

Node = Hashable
Series = Union[pd.DataFrame, Mapping[Node, Sequence[float]]]


class SelectionKind(str, Enum):
    ALL_NODES = "all"
    PEARSON = "pearson"
    NEAREST_NEIGHBOR = "nearest"
    RANDOM = "random"
    GROUP = "group"

    @classmethod
    def parse(cls, value: Union[str, "SelectionKind"]) -> "SelectionKind":
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError as exc:
            raise ConfigurationError(f"Unknown selection method {value!r}, choose from {[k.value for k in cls]}") from exc


@dataclass(frozen=True)
class SelectionMethod:
    """
    Node-selection heuristic with its budget.

    Attributes:
        kind (SelectionKind): heuristic.
        n (int): nodes kept, target included; the group size of the grouped heuristic.
        trials (int): independent draws, used by the random heuristic only.
        absolute (bool): rank Pearson correlations by absolute value.
    """

    kind: SelectionKind = SelectionKind.ALL_NODES
    n: int = 5
    trials: int = 1
    absolute: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SelectionKind.parse(self.kind))
        if self.n < 1:
            raise ConfigurationError(f"Selection needs n >= 1, not {self.n}")
        if self.trials < 1:
            raise ConfigurationError(f"Selection needs trials >= 1, not {self.trials}")


def _check_target(nodes: Sequence[Node], target: Node) -> None:
    if target not in set(nodes):
        raise InputError(f"Target node {target} is not among the candidate nodes")


def _check_n(n: int) -> None:
    if n < 1:
        raise ConfigurationError(f"Selection needs n >= 1, not {n}")


def _ranked(scores: pd.Series, target: Node, n: int, descending: bool) -> List[Node]:
    others = scores.drop(index=target).round(RANK_DECIMALS)
    frame = pd.DataFrame({"score": -others if descending else others, "node": others.index})
    frame = frame.sort_values(["score", "node"], kind="stable")
    return [target] + frame["node"].tolist()[: max(n - 1, 0)]


def all_nodes(nodes: Sequence[Node], target: Node) -> List[Node]:
    """
    Every node, target first, then ascending identifiers.
    """
    _check_target(nodes, target)
    return [target] + sorted(node for node in set(nodes) if node != target)


def _series_frame(volumes: Series) -> pd.DataFrame:
    if isinstance(volumes, pd.DataFrame):
        return volumes
    lengths = {node: len(values) for node, values in volumes.items()}
    if len(set(lengths.values())) > 1:
        raise InputError(f"Volume series have different lengths {lengths}")
    return pd.DataFrame({node: np.asarray(values, dtype=np.float64) for node, values in volumes.items()})


def pearson_scores(volumes: Series, target: Node) -> pd.Series:
    """
    Pearson correlation of every node's series with the target's.

    Zero-variance series have correlation 0.

    Args:
        volumes: TIME x NODE table, or a mapping node -> series of equal length.
        target: reference node.

    Returns:
        pd.Series: correlation indexed by node.

    Raises:
        InputError: unequal or too short series, missing values, unknown target.
    """
    frame = _series_frame(volumes)
    _check_target(list(frame.columns), target)
    if len(frame) < 2:
        raise InputError(f"Pearson correlation needs series of length >= 2, not {len(frame)}")
    values = frame.to_numpy(dtype=np.float64)
    if not np.isfinite(values).all():
        raise InputError("Volume series contain missing or infinite values")
    centered = values - values.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    reference = centered[:, list(frame.columns).index(target)]
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = centered.T @ reference / (norms * norms[list(frame.columns).index(target)])
    scores = np.where(np.isfinite(scores), np.clip(scores, -1.0, 1.0), 0.0)
    return pd.Series(scores, index=frame.columns)


def pearson_top(volumes: Series, target: Node, n: int, absolute: bool = False) -> List[Node]:
    """
    Target plus the ``n - 1`` nodes most correlated with it.

    Ranking uses the signed coefficient unless ``absolute``; ties go to the
    smaller identifier.
    """
    _check_n(n)
    scores = pearson_scores(volumes, target)
    if absolute:
        scores = scores.abs()
    selected = _ranked(scores, target, n, descending=True)
    logger.debug("pearson selection for %s: %s", target, selected)
    return selected


def nearest_neighbors(locations: pd.DataFrame, target: Node, n: int) -> List[Node]:
    """
    Target plus the ``n - 1`` nodes closest to it on raw (LAT, LNG) coordinates.

    Args:
        locations (pd.DataFrame): LAT and LNG indexed by node.
        target: reference node.
        n (int): nodes kept.

    Raises:
        InputError: missing coordinates or unknown target.
    """
    _check_n(n)
    _check_target(list(locations.index), target)
    coordinates = locations[["LAT", "LNG"]].astype(np.float64)
    if coordinates.isna().to_numpy().any():
        missing = coordinates.index[coordinates.isna().any(axis=1)].tolist()
        raise InputError(f"Nodes {missing} have no coordinates")
    delta = coordinates - coordinates.loc[target]
    distances = pd.Series(np.hypot(delta["LAT"], delta["LNG"]), index=coordinates.index)
    return _ranked(distances, target, n, descending=False)


def random_select(nodes: Sequence[Node], target: Node, n: int, seed: int, trials: int = 1) -> List[List[Node]]:
    """
    Target plus ``n - 1`` distinct uniformly drawn others, once per trial.

    Trial ``i`` uses the stream derived from ``(seed, target, i)``.

    Raises:
        ConfigurationError: ``n`` larger than the number of nodes.
    """
    _check_n(n)
    _check_target(nodes, target)
    candidates = sorted(node for node in set(nodes) if node != target)
    if n > len(candidates) + 1:
        raise ConfigurationError(f"Cannot keep {n} of {len(candidates) + 1} nodes")
    selections = []
    for trial in range(trials):
        rng = make_rng(seed, "random-select", target, trial)
        picked = rng.choice(len(candidates), size=n - 1, replace=False)
        selections.append([target] + [candidates[i] for i in sorted(picked)])
    return selections


def select_nodes(
    method: SelectionMethod,
    target: Node,
    nodes: Sequence[Node],
    volumes: Union[Series, None] = None,
    locations: Union[pd.DataFrame, None] = None,
    seed: int = 0,
) -> List[List[Node]]:
    """
    Kept-node sets of a target for a selection method, one per trial.

    ``n`` is capped at the number of nodes. The grouped heuristic keeps the
    target's group of a seeded partition into groups of ``n``.

    Raises:
        ConfigurationError: inputs the method needs are missing.
    """
    n = min(method.n, len(set(nodes)))
    if method.kind is SelectionKind.ALL_NODES:
        return [all_nodes(nodes, target)]
    if method.kind is SelectionKind.PEARSON:
        if volumes is None:
            raise ConfigurationError("Pearson selection needs training volumes")
        return [pearson_top(volumes, target, n, method.absolute)]
    if method.kind is SelectionKind.NEAREST_NEIGHBOR:
        if locations is None:
            raise ConfigurationError("Nearest-neighbor selection needs node locations")
        return [nearest_neighbors(locations, target, n)]
    if method.kind is SelectionKind.GROUP:
        _check_target(nodes, target)
        return [group_selection(partition_groups(nodes, n, seed))[target]]
    return random_select(nodes, target, n, seed, method.trials)


def partition_groups(nodes: Sequence[Node], group_size: int, seed: int) -> List[List[Node]]:
    """
    Randomly partition nodes into groups of ``group_size``; the last group takes the remainder.
    """
    if group_size < 1:
        raise ConfigurationError(f"Group size must be positive, not {group_size}")
    ordered = sorted(set(nodes))
    shuffled = [ordered[i] for i in make_rng(seed, "partition-groups").permutation(len(ordered))]
    return [sorted(shuffled[i : i + group_size]) for i in range(0, len(shuffled), group_size)]


def group_selection(groups: Sequence[Sequence[Node]]) -> Dict[Node, List[Node]]:
    """
    Kept-node set of every node: its own group, the node first.
    """
    return {node: [node] + [other for other in group if other != node] for group in groups for node in group}
