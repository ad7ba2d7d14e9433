import logging
import math
from dataclasses import asdict, dataclass
from typing import Iterable, List, Tuple, Union

import numpy as np
import pandas as pd

from ddos_analysis.attack import AttackScenario
from ddos_analysis.eval.metrics import THRESHOLD
from ddos_analysis.exceptions import InputError

logger = logging.getLogger(__name__)

TIMELINE_COLUMNS = ["TIME", "TRUE_RATIO", "TP_RATIO", "FP_RATIO"]


def _aligned(predictions: pd.DataFrame, labels: pd.DataFrame, threshold: float) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Boolean flag and label tables on the same TIME x NODE grid.

    Missing predictions (timesteps without a full window) are not flagged.
    """
    if not predictions.index.equals(labels.index) or not predictions.columns.equals(labels.columns):
        raise InputError("Predictions and labels must share the same TIME x NODE grid")
    flags = predictions.fillna(-np.inf) >= threshold
    return flags, labels.astype(bool)


def timeline(
    predictions: pd.DataFrame,
    labels: pd.DataFrame,
    scenario: Union[AttackScenario, None] = None,
    threshold: float = THRESHOLD,
) -> pd.DataFrame:
    """
    Per-timestep share of nodes truly attacked, correctly flagged and falsely flagged.

    With a scenario, the timeline covers the calendar days its window touches.

    Args:
        predictions (pd.DataFrame): TIME x NODE attack probabilities.
        labels (pd.DataFrame): TIME x NODE attack flags.
        scenario (AttackScenario, optional): attack window to zoom on.
        threshold (float): decision threshold.

    Returns:
        pd.DataFrame: TIME, TRUE_RATIO, TP_RATIO, FP_RATIO.
    """
    flags, truth = _aligned(predictions, labels, threshold)
    if scenario is not None:
        keep = (flags.index >= scenario.start.floor("D")) & (flags.index < scenario.end.ceil("D"))
        flags, truth = flags[keep], truth[keep]
    nodes = flags.shape[1]
    frame = pd.DataFrame(
        {
            "TIME": flags.index,
            "TRUE_RATIO": truth.sum(axis=1).to_numpy() / nodes,
            "TP_RATIO": (flags & truth).sum(axis=1).to_numpy() / nodes,
            "FP_RATIO": (flags & ~truth).sum(axis=1).to_numpy() / nodes,
        }
    )
    return frame.reset_index(drop=True)


def run_lengths(mask: np.ndarray) -> List[int]:
    """
    Lengths of the maximal runs of True in a boolean sequence.
    """
    padded = np.r_[False, np.asarray(mask, dtype=bool), False].astype(np.int8)
    edges = np.diff(padded)
    return (np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)).tolist()


@dataclass(frozen=True)
class SessionStats:
    """
    Detection statistics over attack sessions.

    Attributes:
        session_detection_rate (float): sessions with at least one attacked node flagged during the window.
        node_detection_rate (float): attacked (node, session) pairs flagged at least once during the window.
        benign_node_rate (float): benign (node, session) pairs never flagged during the window.
        mean_fp_run (float): mean length in timesteps of consecutive false-positive runs, 0 without any.
        mean_fn_run (float): mean length in timesteps of consecutive false-negative runs, 0 without any.
        sessions (int): sessions with at least one attacked node.
    """

    session_detection_rate: float
    node_detection_rate: float
    benign_node_rate: float
    mean_fp_run: float
    mean_fn_run: float
    sessions: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _mean(values: List[int]) -> float:
    return float(np.mean(values)) if values else 0.0


def session_stats(
    predictions: pd.DataFrame,
    labels: pd.DataFrame,
    scenarios: Iterable[AttackScenario],
    threshold: float = THRESHOLD,
) -> SessionStats:
    """
    Session, node and run-length statistics of a detector.

    A session is one attack window; its attacked nodes are the nodes labeled
    attacked inside it. Run lengths are measured on each node's whole
    series. Rates are NaN when no session has an attacked node on the grid.

    Args:
        predictions (pd.DataFrame): TIME x NODE attack probabilities.
        labels (pd.DataFrame): TIME x NODE attack flags.
        scenarios (Iterable[AttackScenario]): attack windows.
        threshold (float): decision threshold.

    Returns:
        SessionStats: detection rates and mean run lengths.
    """
    flags, truth = _aligned(predictions, labels, threshold)
    detected = sessions = 0
    attacked_pairs = attacked_found = benign_pairs = benign_clean = 0
    for scenario in scenarios:
        inside = (flags.index >= scenario.start) & (flags.index < scenario.end)
        window_flags, window_truth = flags[inside], truth[inside]
        attacked = window_truth.any(axis=0)
        if not attacked.any():
            logger.debug("session %s has no attacked node on the grid", scenario.name)
            continue
        hits = (window_flags & window_truth).any(axis=0)
        sessions += 1
        detected += bool(hits.any())
        attacked_pairs += int(attacked.sum())
        attacked_found += int(hits.sum())
        benign = ~attacked
        benign_pairs += int(benign.sum())
        benign_clean += int((~window_flags.loc[:, benign].any(axis=0)).sum())

    fp_runs, fn_runs = [], []
    for node in flags.columns:
        fp_runs += run_lengths((flags[node] & ~truth[node]).to_numpy())
        fn_runs += run_lengths((~flags[node] & truth[node]).to_numpy())

    stats = SessionStats(
        session_detection_rate=detected / sessions if sessions else math.nan,
        node_detection_rate=attacked_found / attacked_pairs if attacked_pairs else math.nan,
        benign_node_rate=benign_clean / benign_pairs if benign_pairs else (1.0 if sessions else math.nan),
        mean_fp_run=_mean(fp_runs),
        mean_fn_run=_mean(fn_runs),
        sessions=sessions,
    )
    logger.info(
        "sessions detected %.3f, attacked nodes detected %.3f, mean FP run %.2f",
        stats.session_detection_rate,
        stats.node_detection_rate,
        stats.mean_fp_run,
    )
    return stats
