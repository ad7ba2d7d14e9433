import math
import random

import numpy as np
import pandas as pd
import pytest

from ddos_analysis.attack import combination_grid
from ddos_analysis.eval import (
    MetricsReport,
    aggregate_by_k,
    evaluate,
    flatten_scores,
    mean_over_nodes,
    node_reports,
    report_table,
)
from ddos_analysis.exceptions import AggregationError


def entry(k, f1, **keys):
    return {"K": k, **keys}, MetricsReport(0.5, 0.5, 0.5, f1, (1, 1, 1, 1), auc=0.7)


class TestAggregateByK:
    def test_single_report_per_k(self):
        frame = aggregate_by_k([entry(0.0, 0.4), entry(1.0, 0.9)])
        assert frame["K"].tolist() == [0.0, 1.0]
        assert frame["F1"].tolist() == [0.4, 0.9]
        assert frame["REPORTS"].tolist() == [1, 1]

    def test_equal_weights(self):
        frame = aggregate_by_k([entry(0.3, 0.4), entry(0.3, 0.6)])
        assert frame["F1"].iloc[0] == pytest.approx(0.5)

    def test_grid_buckets(self):
        grid = combination_grid(["02:00", "10:00", "18:00"], [3600, 14400, 28800], [0.5, 1.0], [0, 0.1, 0.3, 0.5, 0.7, 1])
        assert len(grid) == 108
        frame = aggregate_by_k([entry(c.k, 0.5, SCENARIO=c.name) for c in grid])
        assert len(frame) == 6
        assert set(frame["REPORTS"]) == {18}

    def test_permutation_invariant(self):
        entries = [entry(k, f1 / 10, NODE=node) for node, (k, f1) in enumerate([(0, 1), (0, 7), (1, 3), (1, 4), (1, 8)])]
        expected = aggregate_by_k(entries)
        shuffled = entries[:]
        random.Random(2).shuffle(shuffled)
        pd.testing.assert_frame_equal(aggregate_by_k(shuffled), expected)

    def test_table_input(self):
        table = report_table([entry(0.5, 0.2, NODE=1), entry(0.5, 0.4, NODE=2)])
        assert {"K", "NODE", "F1", "AUC", "TP", "FN"} <= set(table.columns)
        assert aggregate_by_k(table)["F1"].iloc[0] == pytest.approx(0.3)

    def test_undefined_auc_skipped(self):
        table = report_table([entry(0.0, 0.2), entry(0.0, 0.4)])
        table.loc[0, "AUC"] = math.nan
        assert aggregate_by_k(table)["AUC"].iloc[0] == pytest.approx(0.7)

    def test_empty(self):
        with pytest.raises(AggregationError):
            aggregate_by_k([])

    def test_missing_bucket(self):
        with pytest.raises(AggregationError):
            aggregate_by_k([entry(0.0, 0.5)], ks=[0.0, 1.0])


@pytest.fixture(scope="module")
def scores():
    # node 1 catches its only attacked cell, node 2 misses all ten of its own,
    # node 3 is never attacked and raises one false alarm
    index = pd.date_range("2021-01-04", periods=11, freq="10min")
    probabilities = pd.DataFrame({1: [0.9, 0.1] + [np.nan] * 9, 2: [0.2] * 10 + [0.1], 3: [0.7] + [0.1] * 10}, index=index)
    labels = pd.DataFrame({1: [True, False] + [False] * 9, 2: [True] * 10 + [False], 3: False}, index=index)
    return probabilities, labels


class TestNodeReports:
    def test_predicted_cells_only(self, scores):
        reports = node_reports(*scores)
        assert list(reports) == [1, 2, 3]
        assert reports[1].counts == (1, 0, 1, 0)
        assert reports[2].counts == (0, 0, 1, 10)
        assert reports[3].counts == (0, 1, 10, 0)

    def test_auc_needs_both_classes(self, scores):
        reports = node_reports(*scores)
        assert reports[1].auc == pytest.approx(1.0)
        assert math.isnan(reports[3].auc)

    def test_unpredicted_node_dropped(self, scores):
        probabilities, labels = scores
        probabilities = probabilities.assign(**{"4": np.nan})
        labels = labels.assign(**{"4": False})
        assert "4" not in node_reports(probabilities, labels)


class TestMeanOverNodes:
    def test_differs_from_pooled(self, scores):
        reports = node_reports(*scores)
        table = report_table([({"K": 0.0, "NODE": node}, report) for node, report in reports.items()])
        frame = mean_over_nodes(table, ["K"])
        pooled = evaluate(*flatten_scores(*scores))
        assert pooled.f1 == pytest.approx(2 / 13)
        assert frame["F1"].iloc[0] == pytest.approx(0.5)
        assert frame["NODES"].iloc[0] == 3
        assert tuple(frame[["TP", "FP", "TN", "FN"]].iloc[0]) == pooled.counts

    def test_unattacked_node_skipped(self, scores):
        reports = node_reports(*scores)
        table = report_table([({"K": 0.0, "NODE": node}, report) for node, report in reports.items()])
        frame = mean_over_nodes(table, ["K"])
        assert frame["PRECISION"].iloc[0] == pytest.approx(0.5)
        assert frame["BINARY_ACCURACY"].iloc[0] == pytest.approx((1.0 + 1 / 11 + 10 / 11) / 3)

    def test_groups(self):
        table = report_table([entry(0.0, 0.2, NODE=1), entry(0.0, 0.6, NODE=2), entry(1.0, 0.9, NODE=1)])
        frame = mean_over_nodes(table, ["K"])
        assert frame["F1"].tolist() == pytest.approx([0.4, 0.9])
        assert frame["NODES"].tolist() == [2, 1]

    def test_never_attacked_group(self):
        report = MetricsReport(0.9, 0.0, 0.0, 0.0, (0, 1, 9, 0))
        frame = mean_over_nodes(report_table([({"K": 0.5, "NODE": 1}, report)]), ["K"])
        assert frame["F1"].iloc[0] == 0.0

    def test_missing_keys(self):
        with pytest.raises(AggregationError):
            mean_over_nodes(report_table([entry(0.0, 0.2, NODE=1)]), ["COMBINATION"])

    def test_empty(self):
        with pytest.raises(AggregationError):
            mean_over_nodes(pd.DataFrame(), ["K"])
