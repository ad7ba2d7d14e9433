import json
import logging

import pandas as pd
import pytest
import yaml

from ddos_analysis.attack import LabeledDataset
from ddos_analysis.cli import ExperimentConfig, main
from ddos_analysis.cli.main import EXIT_CONFIGURATION, EXIT_FAILURE, EXIT_OK, LOG_LEVEL_VARIABLE, configure_logging
from ddos_analysis.cli.test_cli import SMALL_CONFIG
from ddos_analysis.ingest import BenignDataset, read_events_csv

MALFORMED_EVENTS = "NODE,LAT,LNG,TIME,ACTIVE\n1,0.0,0.0,2021-01-01T00:00:00,1\n2,0.0,0.0,not-a-time,0\n"


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(yaml.safe_dump(SMALL_CONFIG), encoding="utf-8")
    return str(path)


@pytest.fixture(autouse=True)
def root_level():
    level = logging.getLogger().level
    yield
    logging.getLogger().setLevel(level)


def run(config_path, out_dir, command, *extra):
    return main([command, "--config", config_path, "--out-dir", str(out_dir), *extra])


class TestLogging:
    def test_environment_level(self, monkeypatch):
        monkeypatch.setenv(LOG_LEVEL_VARIABLE, "debug")
        configure_logging()
        assert logging.getLogger().level == logging.DEBUG

    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv(LOG_LEVEL_VARIABLE, "DEBUG")
        configure_logging("warning")
        assert logging.getLogger().level == logging.WARNING

    def test_unknown_level(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "synth-events", "--log-level", "chatty") == EXIT_CONFIGURATION


class TestConfigurationErrors:
    def test_missing_config(self, tmp_path):
        assert main(["synth-events", "--config", str(tmp_path / "none.yaml")]) == EXIT_CONFIGURATION

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("features:\n  window: 3\n", encoding="utf-8")
        assert main(["synth-events", "--config", str(path)]) == EXIT_CONFIGURATION

    def test_bad_override(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "synth-events", "--set", "features.n_t=0") == EXIT_CONFIGURATION

    def test_missing_benign_file(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "inject", "--benign", str(tmp_path / "none.csv")) == EXIT_CONFIGURATION

    def test_unknown_combination(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "train", "--combination", "attack_nothing") == EXIT_CONFIGURATION


class TestEvents:
    def test_synth_events_reproducible(self, config_path, tmp_path):
        assert run(config_path, tmp_path / "a", "synth-events") == EXIT_OK
        assert run(config_path, tmp_path / "b", "synth-events") == EXIT_OK
        first = (tmp_path / "a" / "events.csv").read_bytes()
        assert first == (tmp_path / "b" / "events.csv").read_bytes()
        assert read_events_csv(tmp_path / "a" / "events.csv")["NODE"].nunique() == 5

    def test_ingest(self, config_path, tmp_path):
        run(config_path, tmp_path / "raw", "synth-events")
        events = str(tmp_path / "raw" / "events.csv")
        assert run(config_path, tmp_path / "ingested", "ingest", "--events", events) == EXIT_OK
        assert (tmp_path / "ingested" / "events.csv").read_bytes() == (tmp_path / "raw" / "events.csv").read_bytes()
        durations = pd.read_csv(tmp_path / "ingested" / "durations.csv")
        assert durations["NODE"].tolist() == [1, 2, 3, 4, 5]

    def test_ingest_malformed(self, config_path, tmp_path, caplog):
        path = tmp_path / "malformed.csv"
        path.write_text(MALFORMED_EVENTS, encoding="utf-8")
        assert run(config_path, tmp_path, "ingest", "--events", str(path)) == EXIT_FAILURE
        assert "line 3" in caplog.text


class TestDatasets:
    def test_gen_benign(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "gen-benign") == EXIT_OK
        benign = BenignDataset.from_csv(tmp_path / "benign.csv")
        assert len(benign) == 5 * 4 * 144
        frame = benign.frame
        assert (frame.loc[~frame["ACTIVE"], "PACKET"] == 0).all()

    def test_gen_benign_reproducible(self, config_path, tmp_path):
        run(config_path, tmp_path / "a", "gen-benign")
        run(config_path, tmp_path / "b", "gen-benign")
        assert (tmp_path / "a" / "benign.csv").read_bytes() == (tmp_path / "b" / "benign.csv").read_bytes()

    def test_inject_per_combination(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "inject") == EXIT_OK
        names = [combination.name for combination in ExperimentConfig.from_dict(SMALL_CONFIG).combinations]
        for name in names:
            labeled = LabeledDataset.from_csv(tmp_path / f"{name}.csv")
            assert int(labeled.frame["ATTACKED"].sum()) == 4 * 3 * 24
        manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert [entry["file"] for entry in manifest["datasets"]] == [f"{name}.csv" for name in names]

    def test_inject_scenario_grid(self, config_path, tmp_path):
        starts = ["2021-01-02T02:00:00", "2021-01-03T02:00:00"]
        assert run(config_path, tmp_path, "inject", "--start", starts[0], "--start", starts[1]) == EXIT_OK
        # 2 starts x 1 duration x 1 ratio x 2 ks
        assert len(list(tmp_path.glob("attack_*.csv"))) == 4
        assert (tmp_path / "attack_as20210102T020000_ad14400_ar0.6_k1.csv").exists()

    def test_inject_out_of_range(self, config_path, tmp_path, caplog):
        assert run(config_path, tmp_path, "inject", "--start", "2021-01-04T22:00:00") == EXIT_FAILURE
        assert "attack_as20210104T220000" in caplog.text


class TestTrainAndEvaluate:
    def test_train_multiple_models(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "train") == EXIT_OK
        assert len(list((tmp_path / "detector").glob("model_*.ckpt"))) == 5
        selection = json.loads((tmp_path / "selection.json").read_text(encoding="utf-8"))
        assert sorted(selection) == ["1", "2", "3", "4", "5"]

    def test_train_one_model(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "train", "--set", "model.arch=OM-NC") == EXIT_OK
        assert len(list((tmp_path / "detector").glob("model_*.ckpt"))) == 1
        assert not (tmp_path / "selection.json").exists()

    def test_train_one_combination(self, config_path, tmp_path):
        name = ExperimentConfig.from_dict(SMALL_CONFIG).combinations[1].name
        assert run(config_path, tmp_path, "train", "--combination", name, "--set", "model.arch=MM-NC") == EXIT_OK
        assert len(list((tmp_path / "detector").glob("model_*.ckpt"))) == 5

    def test_train_grouped_selection(self, config_path, tmp_path):
        overrides = ["--set", "selection.method=group", "--set", "selection.n=2"]
        assert run(config_path, tmp_path, "train", *overrides) == EXIT_OK
        selection = json.loads((tmp_path / "selection.json").read_text(encoding="utf-8"))
        assert all(len(nodes) <= 2 and nodes[0] == int(target) for target, nodes in selection.items())

    def test_evaluate_reports(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "evaluate") == EXIT_OK
        per_k = pd.read_csv(tmp_path / "per_k.csv")
        assert per_k["K"].tolist() == [0.0, 1.0]
        assert per_k["REPORTS"].tolist() == [1, 1]
        nodes = pd.read_csv(tmp_path / "nodes.csv")
        assert len(nodes) == 2 * 5
        reports = pd.read_csv(tmp_path / "reports.csv")
        assert reports["NODES"].tolist() == [5, 5]
        report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
        assert set(report) == {"config", "combinations", "per_k"}
        assert len(report["combinations"]) == 2
        for record in report["combinations"]:
            assert (tmp_path / "roc" / f"{record['name']}.csv").exists()
            assert len(pd.read_csv(tmp_path / "timeline" / f"{record['name']}.csv")) == 142

    def test_evaluate_trained_detector_twice(self, config_path, tmp_path):
        run(config_path, tmp_path / "trained", "train", "--set", "model.arch=OM-NC")
        detector = str(tmp_path / "trained" / "detector")
        sweep = ["--set", "evaluate.sweep_ratios=[0.2, 0.4]", "--set", "model.arch=OM-NC"]
        assert run(config_path, tmp_path / "a", "evaluate", "--detector", detector, *sweep) == EXIT_OK
        assert run(config_path, tmp_path / "b", "evaluate", "--detector", detector, *sweep) == EXIT_OK
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
        sweep_table = pd.read_csv(tmp_path / "a" / "sweep.csv")
        assert sweep_table["AR"].tolist() == [0.2, 0.4, 0.2, 0.4]

    def test_missing_detector(self, config_path, tmp_path):
        assert run(config_path, tmp_path, "evaluate", "--detector", str(tmp_path)) == EXIT_CONFIGURATION
