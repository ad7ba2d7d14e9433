import pandas as pd
import pytest

from ddos_analysis.exceptions import IngestionError
from ddos_analysis.ingest import (
    DayNightProfile,
    EventRecord,
    events_frame,
    read_events_csv,
    resample,
    synth_events,
    validate_events,
    write_events_csv,
)
from ddos_analysis.ingest.test_ingest import EVENTS_FILE, MALFORMED_EVENTS_FILE


@pytest.fixture(scope="module")
def synthetic():
    """
    Thirty nodes over four days with the default day/night profile.
    """
    yield synth_events(n_nodes=30, days=4, seed=5)


class TestSynthEvents:
    def test_invariants(self, synthetic):
        assert validate_events(synthetic) is True

    def test_node_ids(self, synthetic):
        assert sorted(synthetic.NODE.unique()) == list(range(1, 31))

    def test_every_node_starts_at_begin(self, synthetic):
        first = synthetic.groupby("NODE").TIME.min()
        assert (first == pd.Timestamp("2021-01-01")).all()

    def test_events_within_horizon(self, synthetic):
        assert synthetic.TIME.max() < pd.Timestamp("2021-01-05")

    def test_determinism(self, synthetic, tmp_path):
        again = synth_events(n_nodes=30, days=4, seed=5)
        write_events_csv(synthetic, tmp_path / "a.csv")
        write_events_csv(again, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_seed_changes_output(self, synthetic):
        other = synth_events(n_nodes=30, days=4, seed=6)
        assert not synthetic.equals(other)

    def test_midday_busier_than_midnight(self, synthetic):
        grid = resample(synthetic, 600, pd.Timestamp("2021-01-01"), pd.Timestamp("2021-01-05"))
        hours = grid.TIME.dt.hour
        midday = grid.loc[hours == 12, "ACTIVE"].mean()
        midnight = grid.loc[hours == 0, "ACTIVE"].mean()
        assert midday > midnight

    @pytest.mark.parametrize("n_nodes, days", [(0, 1), (1, 0)])
    def test_invalid_sizes(self, n_nodes, days):
        with pytest.raises(ValueError):
            synth_events(n_nodes=n_nodes, days=days)


class TestDayNightProfile:
    def test_default_shares(self):
        profile = DayNightProfile()
        assert profile.active_share(True) == pytest.approx(100 / 180)
        assert profile.active_share(False) == pytest.approx(80 / 300)

    def test_is_day(self):
        profile = DayNightProfile()
        assert profile.is_day(12 * 3600)
        assert not profile.is_day(0)
        assert not profile.is_day(20 * 3600)
        assert profile.is_day(8 * 3600)

    def test_invalid_window(self):
        with pytest.raises(ValueError):
            DayNightProfile(day_start_hour=20, day_end_hour=8)


class TestValidateEvents:
    def test_unordered(self):
        events = events_frame(
            [
                EventRecord(7, 0.0, 0.0, pd.Timestamp("2021-01-01 01:00"), True),
                EventRecord(7, 0.0, 0.0, pd.Timestamp("2021-01-01 00:30"), False),
            ]
        )
        with pytest.raises(IngestionError, match="node 7") as info:
            validate_events(events)
        assert info.value.node == "7"

    def test_not_alternating(self):
        events = events_frame(
            [
                EventRecord(3, 0.0, 0.0, pd.Timestamp("2021-01-01 00:00"), True),
                EventRecord(3, 0.0, 0.0, pd.Timestamp("2021-01-01 00:30"), True),
            ]
        )
        with pytest.raises(IngestionError, match="node 3"):
            validate_events(events)

    def test_missing_column(self):
        with pytest.raises(IngestionError):
            validate_events(pd.DataFrame({"NODE": [1]}))


class TestEventsCsv:
    def test_read_sample(self):
        events = read_events_csv(EVENTS_FILE)
        assert list(events.columns) == ["NODE", "LAT", "LNG", "TIME", "ACTIVE"]
        assert len(events) == 5
        assert events.NODE.tolist() == [1, 1, 1, 2, 2]
        assert events.ACTIVE.tolist() == [False, True, False, True, False]

    def test_round_trip(self, synthetic, tmp_path):
        path = tmp_path / "events.csv"
        write_events_csv(synthetic, path)
        pd.testing.assert_frame_equal(read_events_csv(path), synthetic, check_dtype=False)

    def test_malformed_row_names_line(self):
        with pytest.raises(IngestionError, match="line 3") as info:
            read_events_csv(MALFORMED_EVENTS_FILE)
        assert info.value.line == 3

    def test_bad_flag(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("NODE,LAT,LNG,TIME,ACTIVE\n1,0,0,2021-01-01T00:00:00,maybe\n")
        with pytest.raises(IngestionError, match="line 2"):
            read_events_csv(path)

    def test_missing_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("NODE,LAT,TIME,ACTIVE\n1,0,2021-01-01T00:00:00,1\n")
        with pytest.raises(IngestionError, match="LNG"):
            read_events_csv(path)
