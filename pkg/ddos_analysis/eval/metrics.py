import logging
import math
from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from ddos_analysis.exceptions import InputError, UndefinedMetricError

logger = logging.getLogger(__name__)

THRESHOLD = 0.5
ROC_COLUMNS = ["FPR", "TPR", "THRESHOLD"]
METRIC_COLUMNS = ["BINARY_ACCURACY", "PRECISION", "RECALL", "F1", "AUC"]


@dataclass(frozen=True)
class MetricsReport:
    """
    Classification metrics of one evaluation set.

    Attributes:
        binary_accuracy (float): share of correct decisions at the threshold.
        precision (float): ``tp / (tp + fp)``, 0 without positive decisions.
        recall (float): ``tp / (tp + fn)``, 0 without positive labels.
        f1 (float): harmonic mean of precision and recall, 0 when both are 0.
        auc (float): area under the ROC curve, NaN when not computed.
        roc_points (pd.DataFrame): FPR, TPR, THRESHOLD from the strictest threshold down.
        counts (Tuple[int, int, int, int]): ``(tp, fp, tn, fn)``.
    """

    binary_accuracy: float
    precision: float
    recall: float
    f1: float
    counts: Tuple[int, int, int, int]
    auc: float = math.nan
    roc_points: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=ROC_COLUMNS), compare=False)

    @property
    def samples(self) -> int:
        return int(sum(self.counts))

    def metrics(self) -> dict:
        return {
            "BINARY_ACCURACY": self.binary_accuracy,
            "PRECISION": self.precision,
            "RECALL": self.recall,
            "F1": self.f1,
            "AUC": self.auc,
        }

    def to_dict(self) -> dict:
        tp, fp, tn, fn = self.counts
        record = {name.lower(): value for name, value in self.metrics().items()}
        record["counts"] = {"tp": tp, "fp": fp, "tn": tn, "fn": fn}
        record["roc_points"] = self.roc_points[ROC_COLUMNS].to_numpy().tolist()
        return record


def _check_inputs(predictions, labels) -> Tuple[np.ndarray, np.ndarray]:
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if predictions.shape != labels.shape:
        raise InputError(f"{predictions.size} predictions for {labels.size} labels")
    if np.isnan(predictions).any():
        raise InputError("Predictions contain NaN")
    return predictions, labels.astype(bool)


def confusion_counts(flags: np.ndarray, labels: np.ndarray) -> Tuple[int, int, int, int]:
    """
    ``(tp, fp, tn, fn)`` of boolean decisions against boolean labels.
    """
    tp = int(np.sum(flags & labels))
    fp = int(np.sum(flags & ~labels))
    tn = int(np.sum(~flags & ~labels))
    fn = int(np.sum(~flags & labels))
    return tp, fp, tn, fn


def from_counts(tp: int, fp: int, tn: int, fn: int) -> MetricsReport:
    """
    Accuracy, precision, recall and F1 of a confusion matrix.
    """
    total = tp + fp + tn + fn
    if total == 0:
        raise InputError("No samples to evaluate")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsReport((tp + tn) / total, precision, recall, f1, (tp, fp, tn, fn))


def threshold_metrics(predictions, labels, threshold: float = THRESHOLD) -> MetricsReport:
    """
    Confusion-matrix metrics of probabilities cut at ``threshold``.

    A sample is flagged as attacked when its probability is at least the threshold.

    Args:
        predictions (array-like): attack probabilities.
        labels (array-like): true attack flags.
        threshold (float): decision threshold.

    Returns:
        MetricsReport: report without ROC curve and AUC.

    Raises:
        InputError: predictions and labels of different lengths.
    """
    predictions, labels = _check_inputs(predictions, labels)
    return from_counts(*confusion_counts(predictions >= threshold, labels))


def roc_auc(predictions, labels) -> Tuple[pd.DataFrame, float]:
    """
    ROC curve and its trapezoidal area.

    Thresholds run from ``+inf`` through every distinct prediction value in
    decreasing order to ``-inf``; tied predictions enter the curve together,
    so the area equals the probability that a random attacked sample scores
    above a random benign one, ties counting one half.

    Returns:
        Tuple[pd.DataFrame, float]: FPR/TPR/THRESHOLD points and the AUC.

    Raises:
        UndefinedMetricError: labels of a single class.
    """
    predictions, labels = _check_inputs(predictions, labels)
    positives = int(labels.sum())
    negatives = labels.size - positives
    if positives == 0 or negatives == 0:
        raise UndefinedMetricError(f"AUC needs both classes, got {positives} attacked and {negatives} benign samples")
    order = np.argsort(-predictions, kind="stable")
    scores, ordered = predictions[order], labels[order]
    # last position of every run of equal scores
    last = np.flatnonzero(np.r_[scores[1:] != scores[:-1], True])
    tps = np.cumsum(ordered)[last]
    fps = (last + 1) - tps
    fpr = np.r_[0.0, fps / negatives, 1.0]
    tpr = np.r_[0.0, tps / positives, 1.0]
    thresholds = np.r_[np.inf, scores[last], -np.inf]
    points = pd.DataFrame({"FPR": fpr, "TPR": tpr, "THRESHOLD": thresholds})
    return points, float(trapezoid(tpr, fpr))


def evaluate(predictions, labels, threshold: float = THRESHOLD) -> MetricsReport:
    """
    Threshold metrics plus ROC curve and AUC.

    Single-class label sets get a NaN AUC and an empty curve.
    """
    report = threshold_metrics(predictions, labels, threshold)
    try:
        points, auc = roc_auc(predictions, labels)
    except UndefinedMetricError as exc:
        logger.warning("%s, AUC left undefined", exc)
        return report
    return replace(report, auc=auc, roc_points=points)
