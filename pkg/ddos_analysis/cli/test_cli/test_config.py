import pandas as pd
import pytest

from ddos_analysis.cli import REFERENCE_CONFIG, ExperimentConfig
from ddos_analysis.cli.test_cli import SMALL_CONFIG
from ddos_analysis.exceptions import ConfigurationError
from ddos_analysis.features import ArchitectureKind
from ddos_analysis.nn import ModelKind
from ddos_analysis.select import SelectionKind


@pytest.fixture(scope="module")
def reference():
    return ExperimentConfig.from_yaml(REFERENCE_CONFIG)


class TestReferenceConfig:
    def test_desk_scale_values(self, reference):
        assert reference.ingest.nodes == 20
        assert reference.ingest.days == 8
        assert reference.ingest.t_s == 600
        assert reference.features.n_t == 10
        features = reference.features
        assert (features.train_days, features.val_days, features.test_days) == (4, 1, 3)
        assert reference.train.epochs == 3
        assert reference.train.batch_size == 32
        assert reference.trends.seeds == [0, 1, 2]

    def test_matches_defaults(self, reference):
        assert reference == ExperimentConfig()

    def test_derived_objects(self, reference):
        assert reference.arch is ArchitectureKind.MM_WC
        assert reference.model_kind is ModelKind.LSTM
        assert reference.selection_method().kind is SelectionKind.ALL_NODES
        assert len(reference.combinations) == 16
        assert {combination.k for combination in reference.combinations} == {0.0, 1.0}
        assert reference.end - reference.begin == pd.Timedelta(days=8)

    def test_raw_volumes(self, reference):
        assert reference.features.normalize is False
        assert reference.train.learning_rate == pytest.approx(1e-3)
        assert reference.train_config(1).learning_rate == pytest.approx(1e-3)


class TestSelectionMethod:
    def test_default(self):
        method = ExperimentConfig().selection_method()
        assert method.kind is SelectionKind.ALL_NODES

    @pytest.mark.parametrize(
        "overrides, kind",
        [
            (["selection.method=pearson", "selection.n=3"], SelectionKind.PEARSON),
            (["selection.method=nearest", "selection.n=3"], SelectionKind.NEAREST_NEIGHBOR),
            (["selection.method=group", "selection.n=3"], SelectionKind.GROUP),
        ],
    )
    def test_from_section(self, overrides, kind):
        method = ExperimentConfig().with_overrides(overrides).selection_method()
        assert method.kind is kind
        assert method.n == 3

    def test_random_trials(self):
        method = ExperimentConfig().with_overrides(["selection.method=random", "selection.trials=4", "selection.absolute=true"]).selection_method()
        assert (method.kind, method.trials, method.absolute) == (SelectionKind.RANDOM, 4, True)


class TestLoading:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_yaml(tmp_path / "missing.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("seed: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_yaml(path)

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")
        assert ExperimentConfig.from_yaml(path) == ExperimentConfig()

    @pytest.mark.parametrize(
        "record",
        [
            {"unknown": 1},
            {"features": {"n_t": 10, "window": 3}},
            {"features": 10},
        ],
    )
    def test_rejects_unknown_or_malformed(self, record):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict(record)

    def test_yaml_round_trip(self, tmp_path):
        config = ExperimentConfig.from_dict(SMALL_CONFIG)
        path = tmp_path / "small.yaml"
        config.to_yaml(path)
        assert ExperimentConfig.from_yaml(path) == config


class TestValidation:
    @pytest.mark.parametrize(
        "record",
        [
            {"ingest": {"t_s": 700}},
            {"features": {"n_t": 0}},
            {"features": {"train_days": 6}},
            {"model": {"kind": "GRU"}},
            {"model": {"arch": "XX-YY"}},
            {"selection": {"method": "shap"}},
            {"selection": {"n": 0}},
            {"benign": {"low": 50.0, "high": 10.0}},
            {"attack": {"ratios": [1.5]}},
            {"train": {"epochs": 0}},
            {"ingest": {"events": "does/not/exist.csv"}},
        ],
    )
    def test_inconsistent_settings(self, record):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict(record)


class TestOverrides:
    def test_values_parsed_as_yaml(self):
        config = ExperimentConfig().with_overrides(["features.n_t=5", "attack.ks=[0, 0.5]", "model.arch=OM-NC", "seed=9"])
        assert config.features.n_t == 5
        assert config.attack.ks == [0, 0.5]
        assert config.arch is ArchitectureKind.OM_NC
        assert config.seed == 9

    def test_original_untouched(self):
        config = ExperimentConfig()
        config.with_overrides(["features.n_t=5"])
        assert config.features.n_t == 10

    @pytest.mark.parametrize("override", ["features.n_t", "=5", "features.window=3", "nothing.n_t=3", "seed.x=1"])
    def test_bad_overrides(self, override):
        with pytest.raises(ConfigurationError):
            ExperimentConfig().with_overrides([override])


class TestStageSeeds:
    def test_deterministic(self):
        assert ExperimentConfig(seed=1).stage_seed("train", 4) == ExperimentConfig(seed=1).stage_seed("train", 4)

    def test_distinct_stages_and_seeds(self):
        seeds = {
            ExperimentConfig(seed=1).stage_seed("train", 4),
            ExperimentConfig(seed=1).stage_seed("train", 5),
            ExperimentConfig(seed=1).stage_seed("split", 4),
            ExperimentConfig(seed=2).stage_seed("train", 4),
        }
        assert len(seeds) == 4

    def test_train_config_seed(self):
        config = ExperimentConfig(seed=1)
        assert config.train_config(7).seed == config.stage_seed("train", 7)
        assert config.train_config(7).epochs == 3
