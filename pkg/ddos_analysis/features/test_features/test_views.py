import math

import numpy as np
import pandas as pd
import pytest
from scipy.special import expit

from ddos_analysis.attack import AttackCombination, daily_scenarios, inject_many
from ddos_analysis.cauchy import TruncatedCauchy
from ddos_analysis.exceptions import ConfigurationError, DegenerateClassError, PipelineError
from ddos_analysis.features import (
    TrainingView,
    build_general,
    class_weights,
    concat_views,
    load_view,
    save_view,
    scale_views,
    select_features,
    split_days,
    window,
)
from ddos_analysis.ingest import assign_volumes, resample, synth_events

T0 = pd.Timestamp("2021-01-01 00:00:00")
N_T = 10


def series_rows(values, labels, node=1, t_s=600):
    values = np.asarray(values, dtype=float).reshape(len(labels), -1)
    frame = pd.DataFrame(
        {
            "NODE": node,
            "TIME": [T0 + pd.Timedelta(seconds=t * t_s) for t in range(len(labels))],
        }
    )
    for f in range(values.shape[1]):
        frame[f"F{f}"] = values[:, f]
    frame["ATTACKED"] = np.asarray(labels, dtype=bool)
    return frame


def day_numbers(part):
    return (part.times.astype("datetime64[D]") - np.datetime64("2021-01-01", "D")).astype(int)


def brute_force_windows(values, labels, n_t):
    samples, targets = [], []
    for end in range(n_t - 1, len(labels)):
        samples.append([list(values[i]) for i in range(end - n_t + 1, end + 1)])
        targets.append(bool(labels[end]))
    return samples, targets


@pytest.fixture(scope="module")
def labeled():
    events = synth_events(n_nodes=6, days=8, seed=1)
    grid = resample(events, 600, T0, T0 + pd.Timedelta(days=8))
    d_benign = TruncatedCauchy(location=10.0, scale=3.0, low=0.0, high=100.0)
    benign = assign_volumes(grid, d_benign, seed=2)
    combination = AttackCombination("06:00", 8 * 3600, 0.5, 0.5)
    return inject_many(benign, daily_scenarios(combination, benign.begin, benign.end, seed=3), d_benign)


@pytest.fixture(scope="module")
def view(labeled):
    return window(select_features(build_general(labeled), "OM-NC"), N_T)


@pytest.fixture(scope="module")
def splits(view):
    return split_days(view, 4, 1, 3, seed=5)


class TestClassWeights:
    def test_balanced(self):
        assert class_weights(40, 40) == (1.0, 1.0, 0.0)

    def test_imbalanced(self):
        w_n, w_p, b_0 = class_weights(20, 80)
        assert w_n == pytest.approx(0.625)
        assert w_p == pytest.approx(2.5)
        assert b_0 == pytest.approx(-1.3862943611198906)

    def test_identities(self):
        rng = np.random.default_rng(8)
        for pos, neg in rng.integers(1, 10_000, size=(100, 2)):
            w_n, w_p, b_0 = class_weights(int(pos), int(neg))
            assert w_n * neg == pytest.approx((pos + neg) / 2, rel=1e-12)
            assert w_p * pos == pytest.approx((pos + neg) / 2, rel=1e-12)
            assert abs(expit(b_0) - pos / (pos + neg)) < 1e-12

    @pytest.mark.parametrize("pos, neg", [(0, 10), (10, 0), (0, 0)])
    def test_degenerate(self, pos, neg):
        with pytest.raises(DegenerateClassError):
            class_weights(pos, neg)


class TestWindow:
    @pytest.mark.parametrize("length, n_t, expected", [(10, 10, 1), (12, 10, 3), (9, 10, 0), (5, 1, 5)])
    def test_count(self, length, n_t, expected):
        rows = pd.concat([series_rows(np.arange(length), [False] * length, node=node) for node in (1, 2)])
        assert len(window(rows, n_t)) == 2 * expected

    def test_tiny_series(self):
        rows = series_rows([1.0, 2.0, 3.0, 4.0], [False, True, False, True])
        view = window(rows, 2)
        np.testing.assert_array_equal(view.samples[:, :, 0], [[1, 2], [2, 3], [3, 4]])
        assert view.labels.tolist() == [True, False, True]
        assert view.feature_names == ["F0"]

    def test_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            length = int(rng.integers(1, 21))
            n_t = int(rng.integers(1, length + 2))
            values = rng.normal(size=(length, 2))
            labels = rng.random(length) < 0.3
            view = window(series_rows(values, labels), n_t)
            samples, targets = brute_force_windows(values, labels, n_t)
            assert len(view) == len(targets)
            if targets:
                np.testing.assert_array_equal(view.samples, np.asarray(samples))
                assert view.labels.tolist() == targets

    def test_windows_never_mix_nodes(self):
        rows = pd.concat(
            [series_rows(np.full(12, 1.0), [False] * 12, node=1), series_rows(np.full(12, 2.0), [False] * 12, node=2)]
        )
        view = window(rows, 10)
        for sample, node in zip(view.samples, view.nodes):
            assert (sample == float(node)).all()

    def test_interleaved_order(self, view):
        assert (np.diff(view.times.astype(np.int64)) >= 0).all()
        assert view.nodes[:6].tolist() == [1, 2, 3, 4, 5, 6]

    def test_start_and_end(self, view):
        span = (view.times - view.starts).astype("timedelta64[s]").astype(np.int64)
        assert (span == (N_T - 1) * 600).all()

    def test_label_preservation(self, view, labeled):
        # attacks start after the first window is complete
        assert view.positives == int(labeled.frame.ATTACKED.sum())

    def test_invalid_length(self):
        with pytest.raises(ConfigurationError):
            window(series_rows([1.0], [False]), 0)


class TestSplitDays:
    def test_blocks(self, splits):
        train, val, test = splits
        assert set(day_numbers(train)) == {0, 1, 2, 3}
        assert set(day_numbers(val)) == {4}
        assert set(day_numbers(test)) == {5, 6, 7}

    def test_no_overlap(self, splits):
        keys = [set(zip(part.nodes.tolist(), part.times.tolist())) for part in splits]
        assert not keys[0] & keys[1]
        assert not keys[1] & keys[2]
        assert not keys[0] & keys[2]

    def test_straddling_windows_dropped(self, splits, view):
        # 9 windows per node cross each of the two inner boundaries
        assert sum(len(part) for part in splits) == len(view) - 2 * 9 * 6

    def test_positives_kept(self, splits, view):
        assert sum(part.positives for part in splits) == view.positives

    def test_train_shuffled_only(self, splits):
        train, val, test = splits
        assert (np.diff(train.times.astype(np.int64)) < 0).any()
        assert (np.diff(val.times.astype(np.int64)) >= 0).all()
        assert (np.diff(test.times.astype(np.int64)) >= 0).all()

    def test_shuffle_deterministic(self, view, splits):
        again = split_days(view, 4, 1, 3, seed=5)[0]
        np.testing.assert_array_equal(again.samples, splits[0].samples)
        other = split_days(view, 4, 1, 3, seed=6)[0]
        assert not np.array_equal(other.times, splits[0].times)

    def test_weights_from_train(self, splits):
        train = splits[0]
        w_n, w_p, b_0 = class_weights(train.positives, train.negatives)
        for part in splits:
            assert part.class_weights == (w_n, w_p)
            assert part.initial_bias == b_0

    def test_manifest(self, splits):
        assert [part.meta["split"] for part in splits] == ["train", "val", "test"]
        assert splits[2].meta["days"] == [5, 8]

    def test_insufficient_days(self, view):
        with pytest.raises(ConfigurationError):
            split_days(view, 4, 1, 4)

    def test_single_class_training_gets_no_weights(self, view):
        train, val, test = split_days(view.take(~view.labels), 4, 1, 3, seed=5)
        assert train.positives == 0
        assert train.class_weights is None
        assert test.initial_bias is None


class TestConcatViews:
    def test_pooled_weights(self, splits):
        train, val, _ = splits
        pooled = concat_views([train, val], seed=2)
        assert len(pooled) == len(train) + len(val)
        assert pooled.positives == train.positives + val.positives
        w_n, w_p, b_0 = class_weights(pooled.positives, pooled.negatives)
        assert pooled.class_weights == pytest.approx((w_n, w_p))
        assert pooled.initial_bias == pytest.approx(b_0)
        assert pooled.meta["pooled"] == 2

    def test_seeded_shuffle(self, splits):
        train, val, _ = splits
        once = concat_views([train, val], seed=2)
        np.testing.assert_array_equal(once.samples, concat_views([train, val], seed=2).samples)
        assert not np.array_equal(once.times, concat_views([train, val], seed=3).times)

    def test_order_kept_without_shuffle(self, splits):
        train, val, _ = splits
        pooled = concat_views([val, train], shuffle=False)
        np.testing.assert_array_equal(pooled.times[: len(val)], val.times)

    def test_empty_views_skipped(self, splits):
        empty = splits[0].take(np.zeros(len(splits[0]), dtype=bool))
        pooled = concat_views([empty, splits[1]], shuffle=False)
        np.testing.assert_array_equal(pooled.samples, splits[1].samples)

    def test_mismatched_features(self, splits):
        other = window(series_rows(np.arange(30.0), [False, True] * 15), N_T)
        with pytest.raises(PipelineError):
            concat_views([splits[0], other])

    def test_nothing_to_pool(self):
        with pytest.raises(PipelineError):
            concat_views([])


class TestScaleViews:
    def test_train_range(self, splits):
        train, val, test = scale_views(*splits)
        assert train.samples.min() == pytest.approx(0.0)
        assert train.samples[:, :, 0].max() == pytest.approx(1.0)
        assert val.samples.shape == splits[1].samples.shape
        assert "scaling" in test.meta

    def test_constant_feature(self):
        view = window(series_rows(np.full(5, 3.0), [False] * 5), 2)
        (scaled,) = scale_views(view)
        assert (scaled.samples == 0).all()


class TestViewFiles:
    def test_round_trip(self, splits, tmp_path):
        path = save_view(splits[1], tmp_path / "val")
        assert path.suffix == ".npz"
        assert (tmp_path / "val.json").exists()
        loaded = load_view(path)
        assert isinstance(loaded, TrainingView)
        np.testing.assert_array_equal(loaded.samples, splits[1].samples)
        np.testing.assert_array_equal(loaded.labels, splits[1].labels)
        np.testing.assert_array_equal(loaded.times, splits[1].times)
        assert loaded.feature_names == splits[1].feature_names
        assert loaded.class_weights == pytest.approx(splits[1].class_weights)
        assert loaded.meta["split"] == "val"

    def test_class_weight_math(self):
        assert math.isclose(class_weights(1, 3)[2], math.log(1 / 3))
