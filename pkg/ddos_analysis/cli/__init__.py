from ddos_analysis.cli.config import REFERENCE_CONFIG, ExperimentConfig
from ddos_analysis.cli.main import build_parser, main
from ddos_analysis.cli.pipeline import (
    Evaluation,
    evaluate_combination,
    make_benign,
    make_events,
    make_labeled,
    make_labeled_sets,
    run_pooled,
    train_detector,
)
from ddos_analysis.cli.trends import TRENDS, Trend, reproduce_trends

__all__ = [
    "REFERENCE_CONFIG",
    "TRENDS",
    "Evaluation",
    "ExperimentConfig",
    "Trend",
    "build_parser",
    "evaluate_combination",
    "main",
    "make_benign",
    "make_events",
    "make_labeled",
    "make_labeled_sets",
    "reproduce_trends",
    "run_pooled",
    "train_detector",
]
