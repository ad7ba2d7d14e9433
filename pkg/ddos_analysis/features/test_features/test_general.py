import numpy as np
import pandas as pd
import pytest

from ddos_analysis.attack import LabeledDataset
from ddos_analysis.exceptions import ConfigurationError, PipelineError
from ddos_analysis.features import OWN_VOLUME, ArchitectureKind, build_general, feature_columns, select_features

T0 = pd.Timestamp("2021-01-01 00:00:00")


def labeled_from_arrays(volumes, attacked, nodes=None, t_s=600):
    volumes = np.asarray(volumes, dtype=float)
    attacked = np.asarray(attacked, dtype=bool)
    n_times, n_nodes = volumes.shape
    nodes = list(range(1, n_nodes + 1)) if nodes is None else nodes
    records = []
    for j, node in enumerate(nodes):
        for t in range(n_times):
            records.append(
                {
                    "NODE": node,
                    "LAT": 0.0,
                    "LNG": float(j),
                    "TIME": T0 + pd.Timedelta(seconds=t * t_s),
                    "ACTIVE": bool(volumes[t, j] > 0 or attacked[t, j]),
                    "PACKET": volumes[t, j],
                    "ATTACKED": attacked[t, j],
                }
            )
    return LabeledDataset(pd.DataFrame(records), t_s)


@pytest.fixture(scope="module")
def small():
    return labeled_from_arrays([[3.0, 0.0], [5.0, 7.0]], [[False, False], [False, True]])


@pytest.fixture(scope="module")
def wide():
    rng = np.random.default_rng(0)
    volumes = rng.uniform(1, 10, size=(3, 50))
    return build_general(labeled_from_arrays(volumes, np.zeros((3, 50), dtype=bool)))


class TestArchitectureKind:
    @pytest.mark.parametrize("value", ["MM-WC", "mm_wc", ArchitectureKind.MM_WC])
    def test_parse(self, value):
        assert ArchitectureKind.parse(value) is ArchitectureKind.MM_WC

    def test_parse_unknown(self):
        with pytest.raises(ConfigurationError):
            ArchitectureKind.parse("XX-WC")

    def test_flags(self):
        assert ArchitectureKind.MM_NC.multiple_models and not ArchitectureKind.MM_NC.with_correlation
        assert ArchitectureKind.OM_WC.with_correlation and not ArchitectureKind.OM_WC.multiple_models


class TestBuildGeneral:
    def test_sample_table(self, small):
        general = build_general(small)
        assert list(general.columns) == ["NODE", "TIME", "N_1", "N_2", "P_1", "P_2", "ATTACKED"]
        assert len(general) == 4
        assert general.NODE.tolist() == [1, 1, 2, 2]
        assert general.N_1.tolist() == [1, 1, 0, 0]
        assert general.N_2.tolist() == [0, 0, 1, 1]
        assert general.P_1.tolist() == [3.0, 5.0, 3.0, 5.0]
        assert general.P_2.tolist() == [0.0, 7.0, 0.0, 7.0]
        assert general.ATTACKED.tolist() == [False, False, False, True]

    def test_onehot_rows(self, wide):
        onehot = wide[[f"N_{node}" for node in range(1, 51)]].to_numpy()
        assert (onehot.sum(axis=1) == 1).all()
        codes = onehot.argmax(axis=1) + 1
        assert (codes == wide.NODE.to_numpy()).all()

    def test_volumes_shared_per_timestamp(self, wide):
        volumes = wide[["TIME"] + [f"P_{node}" for node in range(1, 51)]]
        assert (volumes.groupby("TIME").nunique() == 1).all().all()

    def test_record_count(self, wide):
        assert len(wide) == 150

    def test_missing_cell(self, small):
        frame = small.frame.iloc[1:]
        with pytest.raises(PipelineError):
            build_general(LabeledDataset(frame, 600))


class TestSelectFeatures:
    def test_mm_nc_width(self, wide):
        rows = select_features(wide, "MM-NC", target_node=7)
        assert feature_columns(rows) == ["P_7"]
        assert rows.NODE.unique().tolist() == [7]
        assert len(rows) == 3

    def test_om_wc_width(self, wide):
        rows = select_features(wide, ArchitectureKind.OM_WC)
        assert len(feature_columns(rows)) == 100
        assert len(rows) == 150

    def test_om_nc_width(self, wide):
        rows = select_features(wide, ArchitectureKind.OM_NC)
        names = feature_columns(rows)
        assert len(names) == 51
        assert names[0] == OWN_VOLUME
        own = rows[OWN_VOLUME].to_numpy()
        expected = np.array([wide.loc[i, f"P_{wide.loc[i, 'NODE']}"] for i in range(len(wide))])
        np.testing.assert_array_equal(own, expected)

    def test_mm_wc_kept_target_first(self, wide):
        rows = select_features(wide, "MM-WC", target_node=4, kept_nodes=[9, 4, 2, 30, 11])
        assert feature_columns(rows) == ["P_4", "P_9", "P_2", "P_30", "P_11"]

    def test_mm_wc_all_nodes(self, wide):
        rows = select_features(wide, "MM-WC", target_node=4)
        names = feature_columns(rows)
        assert len(names) == 50
        assert names[0] == "P_4"

    def test_om_wc_kept(self, wide):
        rows = select_features(wide, "OM-WC", kept_nodes=[1, 2, 3])
        assert len(feature_columns(rows)) == 3 + 50

    @pytest.mark.parametrize("n_kept", [1, 3, 8])
    def test_width_formula(self, wide, n_kept):
        kept = list(range(1, n_kept + 1))
        assert len(feature_columns(select_features(wide, "MM-WC", 1, kept))) == n_kept
        assert len(feature_columns(select_features(wide, "OM-WC", None, kept))) == n_kept + 50
        assert len(feature_columns(select_features(wide, "MM-NC", 1, kept))) == 1
        assert len(feature_columns(select_features(wide, "OM-NC", None, kept))) == 51

    def test_missing_target(self, wide):
        with pytest.raises(ConfigurationError):
            select_features(wide, "MM-WC")

    def test_unknown_target(self, wide):
        with pytest.raises(ConfigurationError):
            select_features(wide, "MM-NC", target_node=99)

    def test_unknown_kept(self, wide):
        with pytest.raises(ConfigurationError):
            select_features(wide, "MM-WC", target_node=1, kept_nodes=[1, 99])
