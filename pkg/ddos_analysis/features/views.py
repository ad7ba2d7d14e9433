import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from ddos_analysis.exceptions import ConfigurationError, DegenerateClassError, PipelineError
from ddos_analysis.features.general import KEY_COLUMNS, LABEL_COLUMN, feature_columns
from ddos_analysis.utils.files import atomic_write
from ddos_analysis.utils.seeding import make_rng

logger = logging.getLogger(__name__)


def class_weights(pos: int, neg: int) -> Tuple[float, float, float]:
    """
    Class weights and initial output bias for imbalanced training.

    Each class carries half of the total weight: ``w_n = (pos + neg) / (2 neg)``,
    ``w_p = (pos + neg) / (2 pos)``. The bias ``b_0 = ln(pos / neg)`` makes
    the initial prediction equal the positive rate.

    Args:
        pos (int): number of attacked samples.
        neg (int): number of benign samples.

    Returns:
        Tuple[float, float, float]: ``(w_n, w_p, b_0)``.

    Raises:
        DegenerateClassError: a class without samples.
    """
    if pos <= 0 or neg <= 0:
        raise DegenerateClassError(f"Both classes need samples, got pos={pos}, neg={neg}")
    total = pos + neg
    return total / (2.0 * neg), total / (2.0 * pos), math.log(pos / neg)


@dataclass
class TrainingView:
    """
    Stacked windows ready for a detector.

    Attributes:
        samples (np.ndarray): float64 tensor ``(count, n_t, F)``.
        labels (np.ndarray): attack flag of each window's final timestep.
        feature_names (List[str]): names of the ``F`` features.
        nodes (np.ndarray): node of each window.
        times (np.ndarray): final timestep of each window.
        starts (np.ndarray): first timestep of each window.
        class_weights (Tuple[float, float], optional): ``(w_n, w_p)``.
        initial_bias (float, optional): ``b_0``.
        meta (dict): split manifest and seeds.
    """

    samples: np.ndarray
    labels: np.ndarray
    feature_names: List[str]
    nodes: np.ndarray
    times: np.ndarray
    starts: np.ndarray
    class_weights: Union[Tuple[float, float], None] = None
    initial_bias: Union[float, None] = None
    meta: Dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_t(self) -> int:
        return int(self.samples.shape[1])

    @property
    def width(self) -> int:
        return int(self.samples.shape[2])

    @property
    def positives(self) -> int:
        return int(self.labels.sum())

    @property
    def negatives(self) -> int:
        return len(self) - self.positives

    def take(self, indices: np.ndarray) -> "TrainingView":
        """
        Sub-view of the given sample indices (or boolean mask).
        """
        return replace(
            self,
            samples=self.samples[indices],
            labels=self.labels[indices],
            nodes=self.nodes[indices],
            times=self.times[indices],
            starts=self.starts[indices],
            meta=dict(self.meta),
        )

    def with_weights(self, weights: Tuple[float, float, float]) -> "TrainingView":
        w_n, w_p, b_0 = weights
        return replace(self, class_weights=(w_n, w_p), initial_bias=b_0, meta=dict(self.meta))


def window(rows: pd.DataFrame, n_t: int) -> TrainingView:
    """
    Stack the past ``n_t`` feature rows of every node into samples.

    A node series of length ``T`` gives ``T - n_t + 1`` windows; window ``t``
    covers timesteps ``t - n_t + 1 .. t`` and carries the label of ``t``.
    Windows never mix nodes and series shorter than ``n_t`` give none.
    Samples are ordered by final timestep, then node.

    Args:
        rows (pd.DataFrame): feature table, NODE, TIME, features, ATTACKED.
        n_t (int): window length.

    Returns:
        TrainingView: windows without class weights.
    """
    if not isinstance(n_t, (int, np.integer)) or n_t < 1:
        raise ConfigurationError(f"Window length must be a positive integer, not {n_t!r}")
    names = feature_columns(rows)
    ordered = rows.sort_values(KEY_COLUMNS, kind="stable")
    samples, labels, nodes, times, starts = [], [], [], [], []
    for node, group in ordered.groupby("NODE", sort=True):
        if len(group) < n_t:
            logger.debug("node %s has %d rows, shorter than the window", node, len(group))
            continue
        values = group[names].to_numpy(dtype=np.float64)
        stamps = group["TIME"].to_numpy(dtype="datetime64[ns]")
        samples.append(sliding_window_view(values, (n_t, len(names)))[:, 0])
        labels.append(group[LABEL_COLUMN].to_numpy(dtype=bool)[n_t - 1 :])
        nodes.append(np.repeat(np.asarray([node]), len(group) - n_t + 1))
        times.append(stamps[n_t - 1 :])
        starts.append(stamps[: len(group) - n_t + 1])
    if not samples:
        view = TrainingView(
            samples=np.empty((0, n_t, len(names))),
            labels=np.empty(0, dtype=bool),
            feature_names=names,
            nodes=np.empty(0, dtype=rows["NODE"].dtype),
            times=np.empty(0, dtype="datetime64[ns]"),
            starts=np.empty(0, dtype="datetime64[ns]"),
        )
        return view
    node_array = np.concatenate(nodes)
    time_array = np.concatenate(times)
    node_rank = np.concatenate([np.full(chunk.size, i) for i, chunk in enumerate(nodes)])
    order = np.lexsort((node_rank, time_array))
    view = TrainingView(
        samples=np.ascontiguousarray(np.concatenate(samples)[order]),
        labels=np.concatenate(labels)[order],
        feature_names=names,
        nodes=node_array[order],
        times=time_array[order],
        starts=np.concatenate(starts)[order],
        meta={"n_t": int(n_t)},
    )
    logger.debug("%d windows of %d x %d", len(view), n_t, len(names))
    return view


def split_days(
    view: TrainingView,
    train_days: int = 4,
    val_days: int = 1,
    test_days: int = 3,
    seed: int = 0,
) -> Tuple[TrainingView, TrainingView, TrainingView]:
    """
    Split windows into contiguous day blocks for training, validation and testing.

    Day numbers are counted from the first day covered by the view. A window
    belongs to a block when its first and last timestep both fall in it;
    windows straddling a block boundary and days beyond the three blocks are
    dropped. Only the training partition is shuffled. Class weights and the
    initial bias are computed on the training partition and attached to
    all three views; a training partition holding a single class gets
    none.

    Args:
        view (TrainingView): windows from :func:`window`.
        train_days (int): days in the training block.
        val_days (int): days in the validation block.
        test_days (int): days in the testing block.
        seed (int): seed of the training shuffle.

    Returns:
        Tuple[TrainingView, TrainingView, TrainingView]: train, validation and test views.

    Raises:
        ConfigurationError: fewer whole days than the three blocks need.
    """
    blocks = [train_days, val_days, test_days]
    if any(days < 0 for days in blocks) or train_days < 1:
        raise ConfigurationError(f"Invalid split {blocks}")
    if len(view) == 0:
        raise PipelineError("Cannot split an empty view")
    first_day = np.min(view.starts).astype("datetime64[D]")
    start_day = (view.starts.astype("datetime64[D]") - first_day).astype(np.int64)
    end_day = (view.times.astype("datetime64[D]") - first_day).astype(np.int64)
    available = int(end_day.max()) + 1
    total = sum(blocks)
    if available < total:
        raise ConfigurationError(f"Split {blocks} needs {total} days, the dataset spans {available}")
    if available > total:
        logger.warning("dropping %d days beyond the %d-day split", available - total, total)

    bounds = np.cumsum([0] + blocks)
    block_of_start = np.searchsorted(bounds, start_day, side="right") - 1
    block_of_end = np.searchsorted(bounds, end_day, side="right") - 1
    parts = []
    for block, name in enumerate(("train", "val", "test")):
        indices = np.flatnonzero((block_of_start == block) & (block_of_end == block))
        if name == "train":
            indices = make_rng(seed, "shuffle-train").permutation(indices)
        part = view.take(indices)
        part.meta.update({"split": name, "days": [int(bounds[block]), int(bounds[block + 1])], "seed": int(seed)})
        parts.append(part)
    train, val, test = parts
    logger.info(
        "split %d/%d/%d windows, train pos=%d neg=%d",
        len(train),
        len(val),
        len(test),
        train.positives,
        train.negatives,
    )
    if train.positives == 0 or train.negatives == 0:
        logger.warning("training partition holds a single class, no class weights attached")
        return train, val, test
    weights = class_weights(train.positives, train.negatives)
    return tuple(part.with_weights(weights) for part in parts)


def scale_views(train: TrainingView, *others: TrainingView) -> Tuple[TrainingView, ...]:
    """
    Min-max scale every feature with the range seen on the training view.

    Constant features are shifted to zero and left unscaled.
    """
    low = train.samples.min(axis=(0, 1))
    span = train.samples.max(axis=(0, 1)) - low
    span = np.where(span > 0, span, 1.0)
    scaled = []
    for view in (train,) + others:
        part = replace(view, samples=(view.samples - low) / span, meta=dict(view.meta))
        part.meta["scaling"] = {"low": low.tolist(), "span": span.tolist()}
        scaled.append(part)
    return tuple(scaled)


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def save_view(view: TrainingView, path: Union[str, os.PathLike]) -> Path:
    """
    Write a view as an ``.npz`` tensor file plus a ``.json`` sidecar.

    Returns:
        Path: tensor file path.
    """
    path = Path(path).with_suffix(".npz")
    nodes = np.asarray(view.nodes)
    if nodes.dtype == object:
        nodes = nodes.astype(str)
    with atomic_write(path, "wb") as handle:
        np.savez(
            handle,
            samples=view.samples,
            labels=view.labels,
            nodes=nodes,
            times=view.times.astype("datetime64[ns]"),
            starts=view.starts.astype("datetime64[ns]"),
        )
    header = {
        "shape": list(view.samples.shape),
        "feature_names": list(view.feature_names),
        "class_weights": list(view.class_weights) if view.class_weights is not None else None,
        "initial_bias": view.initial_bias,
        "meta": view.meta,
    }
    with atomic_write(_sidecar(path)) as handle:
        json.dump(header, handle, indent=2, sort_keys=True)
    logger.info("wrote view %s with %d windows", path, len(view))
    return path


def load_view(path: Union[str, os.PathLike]) -> TrainingView:
    """
    Read a view written by :func:`save_view`.

    Raises:
        PipelineError: tensor shape disagrees with the sidecar.
    """
    path = Path(path).with_suffix(".npz")
    header = json.loads(_sidecar(path).read_text(encoding="utf-8"))
    with np.load(path, allow_pickle=False) as arrays:
        view = TrainingView(
            samples=arrays["samples"],
            labels=arrays["labels"],
            feature_names=list(header["feature_names"]),
            nodes=arrays["nodes"],
            times=arrays["times"],
            starts=arrays["starts"],
            class_weights=tuple(header["class_weights"]) if header["class_weights"] is not None else None,
            initial_bias=header["initial_bias"],
            meta=header["meta"],
        )
    if list(view.samples.shape) != header["shape"]:
        raise PipelineError(f"{path}: tensor shape {view.samples.shape} does not match sidecar {header['shape']}")
    return view


def concat_views(views: Sequence[TrainingView], seed: int = 0, shuffle: bool = True) -> TrainingView:
    """
    Pool views of the same architecture, e.g. one per attack combination.

    The pooled samples are reshuffled with ``seed`` when ``shuffle``; class
    weights and the initial bias are recomputed on the pooled labels.

    Raises:
        PipelineError: no views, or views with different feature names or window lengths.
    """
    if not views:
        raise PipelineError("No views to pool")
    filled = [view for view in views if len(view)]
    if not filled:
        return views[0]
    views, first = filled, filled[0]
    for view in views[1:]:
        if view.feature_names != first.feature_names or view.n_t != first.n_t:
            raise PipelineError(f"Cannot pool views with features {first.feature_names} and {view.feature_names}")
    pooled = TrainingView(
        samples=np.concatenate([view.samples for view in views]),
        labels=np.concatenate([view.labels for view in views]),
        feature_names=list(first.feature_names),
        nodes=np.concatenate([view.nodes for view in views]),
        times=np.concatenate([view.times for view in views]),
        starts=np.concatenate([view.starts for view in views]),
        meta=dict(first.meta, pooled=len(views)),
    )
    if shuffle:
        pooled = pooled.take(make_rng(seed, "shuffle-pooled").permutation(len(pooled)))
    if pooled.positives == 0 or pooled.negatives == 0:
        return pooled
    return pooled.with_weights(class_weights(pooled.positives, pooled.negatives))
