import logging
from dataclasses import replace
from typing import Dict, Hashable, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ddos_analysis.eval.metrics import METRIC_COLUMNS, MetricsReport, roc_auc, threshold_metrics
from ddos_analysis.exceptions import AggregationError

logger = logging.getLogger(__name__)

COUNT_COLUMNS = ["TP", "FP", "TN", "FN"]
# undefined for a node without attacked samples
POSITIVE_METRICS = ["PRECISION", "RECALL", "F1"]


def report_table(entries: Iterable[Tuple[Mapping, MetricsReport]]) -> pd.DataFrame:
    """
    One row per evaluated report: its keys (scenario, K, node, ...), metrics and confusion counts.
    """
    rows = []
    for keys, report in entries:
        row = dict(keys)
        row.update(report.metrics())
        row.update(dict(zip(COUNT_COLUMNS, report.counts)))
        rows.append(row)
    return pd.DataFrame(rows)


def aggregate_by_k(
    reports: Union[pd.DataFrame, Iterable[Tuple[Mapping, MetricsReport]]],
    ks: Union[Sequence[float], None] = None,
) -> pd.DataFrame:
    """
    Average every metric over the reports sharing a k.

    Each report weighs the same, whatever its number of samples; undefined
    AUCs are skipped.

    Args:
        reports (pd.DataFrame, Iterable): table from :func:`report_table` (needs a K column), or its entries.
        ks (Sequence[float], optional): k values that must all be present.

    Returns:
        pd.DataFrame: one row per k (ascending) with the mean metrics and the number of reports.

    Raises:
        AggregationError: no reports, or a requested k without any report.
    """
    table = reports if isinstance(reports, pd.DataFrame) else report_table(reports)
    if table.empty:
        raise AggregationError("No reports to aggregate")
    if "K" not in table.columns:
        raise AggregationError("Reports carry no K column")
    if ks is not None:
        missing = sorted(set(float(k) for k in ks) - set(table["K"].astype(float)))
        if missing:
            raise AggregationError(f"No report for k in {missing}")
    grouped = table.groupby("K", sort=True)
    frame = grouped[METRIC_COLUMNS].mean()
    frame["REPORTS"] = grouped.size()
    logger.debug("aggregated %d reports into %d k buckets", len(table), len(frame))
    return frame.reset_index()


def node_reports(probabilities: pd.DataFrame, labels: pd.DataFrame, threshold: float = 0.5) -> Dict[Hashable, MetricsReport]:
    """
    Metrics of every node on its own predicted cells.

    Nodes whose labels hold a single class keep a NaN AUC.

    Args:
        probabilities (pd.DataFrame): TIME x NODE attack probabilities, NaN where no window ends.
        labels (pd.DataFrame): TIME x NODE attack flags, same shape.
        threshold (float): decision threshold.

    Returns:
        Dict[Hashable, MetricsReport]: report per node, in column order.
    """
    reports = {}
    for node in probabilities.columns:
        values = probabilities[node].to_numpy(dtype=np.float64)
        known = ~np.isnan(values)
        if not known.any():
            continue
        flags = labels[node].to_numpy(dtype=bool)[known]
        report = threshold_metrics(values[known], flags, threshold)
        if 0 < flags.sum() < flags.size:
            points, auc = roc_auc(values[known], flags)
            report = replace(report, auc=auc, roc_points=points)
        reports[node] = report
    return reports


def mean_over_nodes(table: pd.DataFrame, keys: Sequence[str]) -> pd.DataFrame:
    """
    Unweighted mean of the per-node metrics of each group of ``keys``.

    Precision, recall and F1 of a node without attacked samples are undefined
    and skipped, as are undefined AUCs. Confusion counts are summed.

    Args:
        table (pd.DataFrame): per-node rows from :func:`report_table`.
        keys (Sequence[str]): columns identifying a group, e.g. the attack combination.

    Returns:
        pd.DataFrame: one row per group with the mean metrics, summed counts and the number of nodes.

    Raises:
        AggregationError: empty table or missing key columns.
    """
    if table.empty:
        raise AggregationError("No node reports to average")
    keys: List[str] = list(keys)
    missing = [key for key in keys if key not in table.columns]
    if missing:
        raise AggregationError(f"Node reports carry no {missing} columns")
    table = table.copy()
    table.loc[table["TP"] + table["FN"] == 0, POSITIVE_METRICS] = np.nan
    grouped = table.groupby(keys, sort=False)
    frame = grouped[METRIC_COLUMNS].mean()
    frame[COUNT_COLUMNS] = grouped[COUNT_COLUMNS].sum()
    frame["NODES"] = grouped.size()
    # F1 stays 0 for a group whose nodes never see an attack
    frame[POSITIVE_METRICS] = frame[POSITIVE_METRICS].fillna(0.0)
    return frame.reset_index()
