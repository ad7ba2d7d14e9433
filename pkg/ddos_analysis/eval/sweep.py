import itertools
import logging
from typing import Sequence, Tuple

import numpy as np
import pandas as pd

from ddos_analysis.attack import AttackCombination, LabeledDataset, daily_scenarios, inject_many
from ddos_analysis.cauchy import TruncatedCauchy
from ddos_analysis.eval.metrics import THRESHOLD, MetricsReport, evaluate
from ddos_analysis.ingest import BenignDataset
from ddos_analysis.nn import Detector
from ddos_analysis.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["AR", "K", "AD", "F1", "BINARY_ACCURACY", "AUC"]


def detector_scores(detector: Detector, labeled: LabeledDataset) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    TIME x NODE probabilities of a detector and the matching labels.
    """
    probabilities = detector.predict(labeled)
    labels = labeled.label_matrix().reindex(index=probabilities.index, columns=probabilities.columns)
    return probabilities, labels


def flatten_scores(probabilities: pd.DataFrame, labels: pd.DataFrame) -> Tuple[np.ndarray, np.ndarray]:
    """
    Predictions and labels of the cells that have a prediction.
    """
    values = probabilities.to_numpy()
    known = ~np.isnan(values)
    return values[known], labels.to_numpy(dtype=bool)[known]


def evaluate_detector(detector: Detector, labeled: LabeledDataset, threshold: float = THRESHOLD) -> MetricsReport:
    return evaluate(*flatten_scores(*detector_scores(detector, labeled)), threshold)


def sweep_ar(
    detector: Detector,
    benign: BenignDataset,
    d_benign: TruncatedCauchy,
    ratios: Sequence[float],
    ks: Sequence[float],
    durations: Sequence[int],
    start_time: str = "02:00",
    seed: int = 0,
    threshold: float = THRESHOLD,
) -> pd.DataFrame:
    """
    F1 of a trained detector over a range of attacked-node ratios.

    Every (k, a_d, a_r) combination is injected afresh into the benign
    dataset, one window per day, and scored with the fixed detector.

    Args:
        detector (Detector): trained detector.
        benign (BenignDataset): attack-free test data.
        d_benign (TruncatedCauchy): benign volume law the attack law derives from.
        ratios (Sequence[float]): a_r values, duplicates ignored.
        ks (Sequence[float]): k values.
        durations (Sequence[int]): a_d values [s].
        start_time (str): daily attack start (HH:MM).
        seed (int): master seed of the injected scenarios.
        threshold (float): decision threshold.

    Returns:
        pd.DataFrame: AR, K, AD, F1, BINARY_ACCURACY, AUC.
    """
    rows = []
    sweep_seed = derive_seed(seed, "sweep-ar")
    for k, duration in itertools.product(dict.fromkeys(ks), dict.fromkeys(durations)):
        for ratio in dict.fromkeys(ratios):
            combination = AttackCombination(start_time, duration, ratio, k)
            labeled = inject_many(benign, daily_scenarios(combination, benign.begin, benign.end, sweep_seed), d_benign)
            report = evaluate_detector(detector, labeled, threshold)
            rows.append([ratio, k, duration, report.f1, report.binary_accuracy, report.auc])
            logger.debug("sweep %s F1 %.4f", combination.name, report.f1)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
