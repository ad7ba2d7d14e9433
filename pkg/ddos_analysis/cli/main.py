import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Union

import pandas as pd

from ddos_analysis.attack import inject, scenario_grid
from ddos_analysis.cli.config import REFERENCE_CONFIG, ExperimentConfig
from ddos_analysis.cli.pipeline import (
    evaluate_combination,
    make_benign,
    make_labeled,
    make_labeled_sets,
    testing_bounds,
    train_detector,
)
from ddos_analysis.cli.trends import reproduce_trends
from ddos_analysis.eval import aggregate_by_k, mean_over_nodes, sweep_ar, write_report, write_table
from ddos_analysis.exceptions import ConfigurationError, DDoSAnalysisError
from ddos_analysis.ingest import (
    BenignDataset,
    mean_activity_durations,
    read_events_csv,
    resample,
    synth_events,
    write_events_csv,
)
from ddos_analysis.nn import Detector
from ddos_analysis.select import save_selection

logger = logging.getLogger(__name__)

LOG_LEVEL_VARIABLE = "DDOS_ANALYSIS_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIGURATION = 2


def configure_logging(level: Union[str, None] = None) -> None:
    name = (level or os.environ.get(LOG_LEVEL_VARIABLE) or "INFO").upper()
    if not isinstance(logging.getLevelName(name), int):
        raise ConfigurationError(f"Unknown log level {name!r}")
    logging.basicConfig(format=LOG_FORMAT)
    logging.getLogger().setLevel(name)


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    path = args.config or REFERENCE_CONFIG
    return ExperimentConfig.from_yaml(path).with_overrides(args.set or [])


def output_dir(config: ExperimentConfig, args: argparse.Namespace) -> Path:
    return Path(args.out_dir or config.output)


def existing(path: str) -> str:
    if not Path(path).exists():
        raise ConfigurationError(f"{path} does not exist")
    return path


def load_benign(config: ExperimentConfig, path: Union[str, None]) -> BenignDataset:
    if path:
        return BenignDataset.from_csv(existing(path), config.ingest.t_s)
    return make_benign(config)


def cmd_synth_events(config: ExperimentConfig, args: argparse.Namespace) -> int:
    ingest = config.ingest
    events = synth_events(ingest.nodes, ingest.days, seed=config.stage_seed("events"), begin=config.begin)
    path = Path(args.out or output_dir(config, args) / "events.csv")
    write_events_csv(events, path)
    print(f"{len(events)} events for {ingest.nodes} nodes written to {path}")
    return EXIT_OK


def cmd_ingest(config: ExperimentConfig, args: argparse.Namespace) -> int:
    path = args.events or config.ingest.events
    if not path:
        raise ConfigurationError("ingest needs --events or ingest.events")
    events = read_events_csv(existing(path))
    out = output_dir(config, args)
    write_events_csv(events, out / "events.csv")
    grid = resample(events, config.ingest.t_s, config.begin, config.end)
    durations = mean_activity_durations(grid, config.ingest.t_s)
    write_table(durations.reset_index(), out / "durations.csv")
    print(f"{len(events)} events of {events['NODE'].nunique()} nodes ingested into {out}")
    return EXIT_OK


def cmd_gen_benign(config: ExperimentConfig, args: argparse.Namespace) -> int:
    events = read_events_csv(existing(args.events)) if args.events else None
    benign = make_benign(config, events)
    path = Path(args.out or output_dir(config, args) / "benign.csv")
    benign.to_csv(path)
    print(f"{len(benign)} benign rows written to {path}")
    return EXIT_OK


def cmd_inject(config: ExperimentConfig, args: argparse.Namespace) -> int:
    """
    One labeled CSV per attack combination, or per scenario with ``--start``.
    """
    benign = load_benign(config, args.benign)
    out = output_dir(config, args)
    manifest = []
    if args.start:
        attack = config.attack
        for scenario in scenario_grid(args.start, attack.durations, attack.ratios, attack.ks, config.stage_seed("scenarios")):
            labeled = inject(benign, scenario, config.d_benign)
            labeled.to_csv(out / f"{scenario.name}.csv")
            manifest.append({"file": f"{scenario.name}.csv", "scenarios": [scenario.to_dict()]})
    else:
        for combination in config.combinations:
            labeled = make_labeled(config, benign, combination)
            labeled.to_csv(out / f"{combination.name}.csv")
            manifest.append(
                {
                    "file": f"{combination.name}.csv",
                    "combination": combination.to_dict(),
                    "scenarios": [scenario.to_dict() for scenario in labeled.scenarios],
                }
            )
    write_report({"datasets": manifest}, out / "manifest.json")
    print(f"{len(manifest)} labeled datasets written to {out}")
    return EXIT_OK


def cmd_train(config: ExperimentConfig, args: argparse.Namespace) -> int:
    """
    Train one detector on the pooled attack combinations, or on one with ``--combination``.
    """
    benign = load_benign(config, args.benign)
    combinations = config.combinations
    if args.combination:
        combinations = [combination for combination in combinations if combination.name == args.combination]
        if not combinations:
            names = sorted(combination.name for combination in config.combinations)
            raise ConfigurationError(f"Unknown attack combination {args.combination!r}, choose from {names}")
    labeled_sets = make_labeled_sets(config, benign, combinations)
    detector = train_detector(config, list(labeled_sets.values()))
    out = output_dir(config, args)
    directory = detector.save(out / "detector")
    if detector.kept:
        save_selection(detector.kept, out / "selection.json")
    print(f"{len(detector.models)} {config.model_kind.value}/{config.arch.value} checkpoints written to {directory}")
    return EXIT_OK


def cmd_evaluate(config: ExperimentConfig, args: argparse.Namespace) -> int:
    """
    Evaluate every attack combination on the testing days and write the reports.

    Without ``--detector`` one detector is trained on the pooled combinations.
    ``nodes.csv`` holds one row per node and combination, ``reports.csv`` their
    unweighted mean per combination and ``per_k.csv`` the mean over combinations.
    """
    benign = load_benign(config, args.benign)
    labeled_sets = make_labeled_sets(config, benign)
    if args.detector:
        detector = Detector.load(args.detector)
    else:
        detector = train_detector(config, list(labeled_sets.values()))
    out = output_dir(config, args)
    evaluations = []
    for combination in config.combinations:
        evaluation = evaluate_combination(config, detector, labeled_sets[combination.name], combination)
        write_table(evaluation.report.roc_points, out / "roc" / f"{combination.name}.csv")
        write_table(evaluation.timeline, out / "timeline" / f"{combination.name}.csv")
        evaluations.append(evaluation)
    nodes = pd.concat([evaluation.node_table() for evaluation in evaluations], ignore_index=True)
    table = mean_over_nodes(nodes, list(evaluations[0].keys()))
    per_k = aggregate_by_k(table, config.attack.ks)
    write_table(nodes, out / "nodes.csv")
    write_table(table, out / "reports.csv")
    write_table(per_k, out / "per_k.csv")
    report = {
        "config": config.to_dict(),
        "combinations": [evaluation.record() for evaluation in evaluations],
        "per_k": per_k,
    }
    if config.evaluate.sweep_ratios:
        sweep = run_sweep(config, benign, detector)
        write_table(sweep, out / "sweep.csv")
        report["sweep"] = sweep
    write_report(report, out / "report.json")
    print(per_k.to_string(index=False))
    return EXIT_OK


def run_sweep(config: ExperimentConfig, benign: BenignDataset, detector: Detector) -> pd.DataFrame:
    """
    Attacked-ratio sweep of a trained detector on the testing days.
    """
    first, _ = testing_bounds(config, benign.begin)
    test_begin = first.normalize()
    frame = benign.frame[benign.frame["TIME"] >= test_begin]
    test_days = BenignDataset(frame, benign.t_s)
    evaluate = config.evaluate
    return sweep_ar(
        detector,
        test_days,
        config.d_benign,
        evaluate.sweep_ratios,
        evaluate.sweep_ks or config.attack.ks,
        evaluate.sweep_durations or config.attack.durations,
        start_time=evaluate.sweep_start,
        seed=config.stage_seed("sweep"),
        threshold=evaluate.threshold,
    )


def cmd_reproduce_trends(config: ExperimentConfig, args: argparse.Namespace) -> int:
    report = reproduce_trends(config, output_dir(config, args))
    for trend in report["trends"]:
        status = "pass" if trend["passed"] else "FAIL"
        print(
            f"{trend['name']:4s} {status}  {trend['measured']:.4f} vs {trend['reference']:.4f}"
            f"  (difference {trend['difference']:+.4f}, required {trend['required_margin']:+.2f})"
        )
    return EXIT_OK if report["passed"] else EXIT_FAILURE


COMMANDS = {
    "synth-events": (cmd_synth_events, "synthesize a raw event log"),
    "ingest": (cmd_ingest, "validate and normalize a raw event log"),
    "gen-benign": (cmd_gen_benign, "resample events and draw benign volumes"),
    "inject": (cmd_inject, "inject attacks into the benign dataset"),
    "train": (cmd_train, "train a detector on the pooled attack combinations"),
    "evaluate": (cmd_evaluate, "evaluate detectors on every attack combination"),
    "reproduce-trends": (cmd_reproduce_trends, "run the desk-scale trend experiments"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"experiment YAML, defaults to {REFERENCE_CONFIG.name}")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config value")
    common.add_argument("--log-level", help=f"logging level, defaults to ${LOG_LEVEL_VARIABLE} or INFO")
    common.add_argument("--out-dir", help="output directory, defaults to the config's output")

    parser = argparse.ArgumentParser(prog="ddos-analysis", description="Correlation-aware DDoS detection experiments.")
    commands = parser.add_subparsers(dest="command", required=True)
    parsers = {name: commands.add_parser(name, parents=[common], help=text) for name, (_, text) in COMMANDS.items()}

    parsers["synth-events"].add_argument("--out", help="event CSV path")
    parsers["ingest"].add_argument("--events", help="event CSV to ingest, defaults to ingest.events")
    parsers["gen-benign"].add_argument("--events", help="event CSV, synthesized when omitted")
    parsers["gen-benign"].add_argument("--out", help="benign CSV path")
    for name in ("inject", "train", "evaluate"):
        parsers[name].add_argument("--benign", help="benign CSV, generated from the config when omitted")
    parsers["inject"].add_argument("--start", action="append", help="absolute attack start; repeat for a scenario grid")
    parsers["train"].add_argument("--combination", help="train on this attack combination only")
    parsers["evaluate"].add_argument("--detector", help="trained detector directory")
    return parser


def main(argv: Union[List[str], None] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
        config = load_config(args)
        handler, _ = COMMANDS[args.command]
        return handler(config, args)
    except ConfigurationError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIGURATION
    except DDoSAnalysisError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
