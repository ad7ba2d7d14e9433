import numpy as np
import pandas as pd
import pytest

from ddos_analysis.cauchy import TruncatedCauchy, mean
from ddos_analysis.exceptions import IngestionError, PipelineError
from ddos_analysis.ingest import (
    BenignDataset,
    EventRecord,
    active_fraction_by_time_of_day,
    assign_volumes,
    events_frame,
    events_from_grid,
    mean_activity_durations,
    read_events_csv,
    resample,
    synth_events,
)
from ddos_analysis.ingest.test_ingest import EVENTS_FILE

T0 = pd.Timestamp("2021-01-01 00:00:00")


def seconds(n):
    return T0 + pd.Timedelta(seconds=n)


@pytest.fixture(scope="module")
def d_benign():
    return TruncatedCauchy(location=10.0, scale=3.0, low=0.0, high=100.0)


@pytest.fixture(scope="module")
def grid():
    events = synth_events(n_nodes=6, days=2, seed=11)
    yield resample(events, 600, T0, T0 + pd.Timedelta(days=2))


class TestResample:
    def test_hand_traced_carry_forward(self):
        events = events_frame([EventRecord(1, 0.0, 0.0, seconds(0), True), EventRecord(1, 0.0, 0.0, seconds(1500), False)])
        grid = resample(events, 600, seconds(0), seconds(3000))
        assert grid.TIME.tolist() == [seconds(t) for t in (0, 600, 1200, 1800, 2400)]
        assert grid.ACTIVE.tolist() == [True, True, True, False, False]

    def test_single_event_carried_forward(self):
        events = events_frame([EventRecord(4, 1.0, 2.0, seconds(0), True)])
        grid = resample(events, 600, seconds(0), seconds(6000))
        assert grid.ACTIVE.all()
        assert (grid.LAT == 1.0).all()

    def test_default_inactive_before_first_event(self):
        events = events_frame([EventRecord(4, 1.0, 2.0, seconds(1200), True)])
        grid = resample(events, 600, seconds(0), seconds(2400))
        assert grid.ACTIVE.tolist() == [False, False, True, True]

    def test_grid_completeness(self, grid):
        assert len(grid) == 6 * 288
        assert (grid.groupby("NODE").size() == 288).all()

    def test_sample_file(self):
        events = read_events_csv(EVENTS_FILE)
        grid = resample(events, 600, pd.Timestamp("2021-01-01 23:00"), pd.Timestamp("2021-01-02 00:00"))
        node_1 = grid[grid.NODE == 1].ACTIVE.tolist()
        node_2 = grid[grid.NODE == 2].ACTIVE.tolist()
        assert node_1 == [False, False, True, True, True, True]
        assert node_2 == [False, True, True, True, True, False]

    def test_unordered_events(self):
        events = events_frame([EventRecord(9, 0.0, 0.0, seconds(600), True), EventRecord(9, 0.0, 0.0, seconds(0), False)])
        with pytest.raises(IngestionError, match="node 9"):
            resample(events, 600, seconds(0), seconds(1200))

    @pytest.mark.parametrize("t_s, end", [(0, 1200), (-600, 1200), (600, 0)])
    def test_invalid_window(self, t_s, end):
        events = events_frame([EventRecord(1, 0.0, 0.0, seconds(0), True)])
        with pytest.raises(IngestionError):
            resample(events, t_s, seconds(0), seconds(end))

    def test_idempotent_through_implied_events(self, grid):
        implied = events_from_grid(grid)
        again = resample(implied, 600, T0, T0 + pd.Timedelta(days=2))
        pd.testing.assert_frame_equal(again, grid)


class TestAssignVolumes:
    def test_all_inactive(self, d_benign):
        events = events_frame([EventRecord(n, 0.0, 0.0, seconds(0), False) for n in (1, 2, 3)])
        grid = resample(events, 600, seconds(0), seconds(6000))
        dataset = assign_volumes(grid, d_benign, seed=1)
        assert (dataset.frame.PACKET == 0).all()

    def test_support_and_zero_when_inactive(self, grid, d_benign):
        dataset = assign_volumes(grid, d_benign, seed=2)
        frame = dataset.frame
        assert frame.loc[frame.ACTIVE, "PACKET"].between(0, d_benign.high).all()
        assert (frame.loc[~frame.ACTIVE, "PACKET"] == 0).all()
        dataset.validate()

    def test_determinism(self, grid, d_benign):
        a = assign_volumes(grid, d_benign, seed=2).frame
        b = assign_volumes(grid, d_benign, seed=2).frame
        pd.testing.assert_frame_equal(a, b)

    def test_empirical_mean(self, d_benign):
        events = events_frame([EventRecord(n, 0.0, 0.0, seconds(0), True) for n in range(100)])
        grid = resample(events, 600, seconds(0), seconds(600 * 1000))
        volumes = assign_volumes(grid, d_benign, seed=3).frame.PACKET.to_numpy()
        assert volumes.size == 100_000
        standard_error = volumes.std(ddof=1) / np.sqrt(volumes.size)
        assert abs(volumes.mean() - mean(d_benign)) < 3 * standard_error

    def test_same_rows_per_node(self, grid, d_benign):
        counts = assign_volumes(grid, d_benign, seed=2).frame.groupby("NODE").size()
        assert counts.nunique() == 1


class TestBenignDataset:
    def test_csv_round_trip(self, grid, d_benign, tmp_path):
        dataset = assign_volumes(grid, d_benign, seed=4)
        dataset.to_csv(tmp_path / "benign.csv")
        loaded = BenignDataset.from_csv(tmp_path / "benign.csv")
        assert loaded.t_s == 600
        pd.testing.assert_frame_equal(loaded.frame, dataset.frame, check_dtype=False)

    def test_header(self, grid, d_benign, tmp_path):
        assign_volumes(grid, d_benign, seed=4).to_csv(tmp_path / "benign.csv")
        header = (tmp_path / "benign.csv").read_text().splitlines()[0]
        assert header == "NODE,LAT,LNG,TIME,ACTIVE,PACKET"

    def test_matrices(self, grid, d_benign):
        dataset = assign_volumes(grid, d_benign, seed=4)
        volumes = dataset.volume_matrix()
        assert volumes.shape == (288, 6)
        assert list(volumes.columns) == dataset.nodes
        dataset.check_complete()

    def test_incomplete(self, grid, d_benign):
        dataset = assign_volumes(grid, d_benign, seed=4)
        broken = BenignDataset(dataset.frame.iloc[1:], 600)
        with pytest.raises(PipelineError):
            broken.check_complete()

    def test_validate_inconsistent_packet(self, grid, d_benign):
        frame = assign_volumes(grid, d_benign, seed=4).frame.copy()
        frame.loc[~frame.ACTIVE, "PACKET"] = 1.0
        with pytest.raises(PipelineError):
            BenignDataset(frame, 600).validate()

    def test_end_is_exclusive(self, grid, d_benign):
        dataset = assign_volumes(grid, d_benign, seed=4)
        assert dataset.begin == T0
        assert dataset.end == T0 + pd.Timedelta(days=2)


class TestActivityAnalysis:
    def test_active_fraction_by_time_of_day(self, grid, d_benign):
        share = active_fraction_by_time_of_day(assign_volumes(grid, d_benign, seed=4))
        assert len(share) == 144
        assert share.between(0, 1).all()

    def test_mean_activity_durations(self):
        events = events_frame(
            [
                EventRecord(1, 0.0, 0.0, pd.Timestamp("2021-01-01 10:00"), True),
                EventRecord(1, 0.0, 0.0, pd.Timestamp("2021-01-01 11:00"), False),
                EventRecord(1, 0.0, 0.0, pd.Timestamp("2021-01-01 22:00"), True),
            ]
        )
        grid = resample(events, 600, pd.Timestamp("2021-01-01 10:00"), pd.Timestamp("2021-01-01 23:00"))
        durations = mean_activity_durations(grid, 600)
        assert durations.loc[1, "DAY_ACTIVE"] == pytest.approx(60.0)
        assert durations.loc[1, "DAY_INACTIVE"] == pytest.approx(660.0)
        assert durations.loc[1, "NIGHT_ACTIVE"] == pytest.approx(60.0)
        assert np.isnan(durations.loc[1, "NIGHT_INACTIVE"])
