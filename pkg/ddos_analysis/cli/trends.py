import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ddos_analysis.cli.config import ExperimentConfig
from ddos_analysis.cli.pipeline import make_benign, make_labeled_sets, run_pooled
from ddos_analysis.eval import write_report, write_table
from ddos_analysis.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

RUN_COLUMNS = ["SEED", "EXPERIMENT", "COMBINATION", "K", "TRIAL", "F1", "AUC"]

# experiment name -> (architecture, selection method)
EXPERIMENTS: Dict[str, Tuple[str, str]] = {
    "MM-WC": ("MM-WC", "all"),
    "MM-NC": ("MM-NC", "all"),
    "PEARSON": ("MM-WC", "pearson"),
    "RANDOM": ("MM-WC", "random"),
}


@dataclass(frozen=True)
class Trend:
    """
    Qualitative claim ``mean F1(left) >= mean F1(right) + margin``.

    Attributes:
        name (str): short identifier.
        claim (str): the claim in words.
        left (Tuple[str, str]): experiment and k selector (``"low"``/``"high"``) of the left side.
        right (Tuple[str, str]): same for the right side.
        margin (float): required difference, negative for tolerated degradations.
    """

    name: str
    claim: str
    left: Tuple[str, str]
    right: Tuple[str, str]
    margin: float

    def check(self, means: Dict[Tuple[str, str], float]) -> dict:
        measured, reference = means[self.left], means[self.right]
        difference = measured - reference
        return {
            "name": self.name,
            "claim": self.claim,
            "measured": measured,
            "reference": reference,
            "difference": difference,
            "required_margin": self.margin,
            "passed": bool(np.isfinite(difference) and difference >= self.margin),
        }


TRENDS = [
    Trend("T1", "correlated features help against camouflaged attacks", ("MM-WC", "low"), ("MM-NC", "low"), 0.15),
    Trend("T2", "uncorrelated detectors improve with the packet-volume parameter", ("MM-NC", "high"), ("MM-NC", "low"), 0.10),
    Trend("T3a", "Pearson selection stays close to using all nodes", ("PEARSON", "low"), ("MM-WC", "low"), -0.10),
    Trend("T3b", "Pearson selection is not worse than random selection", ("PEARSON", "low"), ("RANDOM", "low"), -0.02),
]


def experiment_config(config: ExperimentConfig, seed: int, experiment: str) -> ExperimentConfig:
    arch, method = EXPERIMENTS[experiment]
    trials = config.trends.random_trials if method == "random" else 1
    return config.with_overrides(
        [
            f"seed={seed}",
            f"model.arch={arch}",
            f"selection.method={method}",
            f"selection.n={config.trends.selection_n}",
            f"selection.trials={trials}",
        ]
    )


def k_bounds(config: ExperimentConfig) -> Tuple[float, float]:
    ks = sorted(set(config.attack.ks))
    if len(ks) < 2:
        raise ConfigurationError(f"Trend experiments need at least two values of k, not {ks}")
    return ks[0], ks[-1]


def run_experiments(config: ExperimentConfig, experiments: Union[Sequence[str], None] = None) -> pd.DataFrame:
    """
    Test-day F1 and AUC of every trend experiment, seed and attack combination.

    All experiments of a seed share its labeled datasets. Each experiment
    trains one detector per random trial on the pooled attack combinations
    and scores it on the low-k combinations; the uncorrelated detector is
    also scored on the high-k ones. Scores are unweighted means over nodes.
    ``experiments`` restricts the run to some of the named experiments.
    """
    k_low, k_high = k_bounds(config)
    unknown = sorted(set(experiments or []) - set(EXPERIMENTS))
    if unknown:
        raise ConfigurationError(f"Unknown trend experiments {unknown}, choose from {list(EXPERIMENTS)}")
    rows = []
    for seed in config.trends.seeds:
        base = config.with_overrides([f"seed={seed}"])
        labeled_sets = make_labeled_sets(base, make_benign(base))
        for experiment in experiments or EXPERIMENTS:
            variant = experiment_config(config, seed, experiment)
            ks = (k_low, k_high) if experiment == "MM-NC" else (k_low,)
            combinations = [combination for combination in base.combinations if combination.k in ks]
            for trial in range(variant.selection.trials):
                _, evaluations = run_pooled(variant, labeled_sets, trial=trial, evaluate_on=combinations)
                for evaluation in evaluations:
                    summary, combination = evaluation.summary, evaluation.combination
                    rows.append([seed, experiment, combination.name, combination.k, trial, summary["F1"], summary["AUC"]])
                logger.info("seed %d %s trial %d: %d combinations scored", seed, experiment, trial, len(evaluations))
    return pd.DataFrame(rows, columns=RUN_COLUMNS)


def trend_means(runs: pd.DataFrame, k_low: float, k_high: float) -> Dict[Tuple[str, str], float]:
    means = {}
    for experiment in EXPERIMENTS:
        for side, k in (("low", k_low), ("high", k_high)):
            f1 = runs.loc[(runs["EXPERIMENT"] == experiment) & (runs["K"] == k), "F1"]
            means[(experiment, side)] = float(f1.mean()) if len(f1) else float("nan")
    return means


def reproduce_trends(config: ExperimentConfig, output: Union[str, os.PathLike, None] = None) -> dict:
    """
    Run the trend experiments and check every trend.

    Args:
        config (ExperimentConfig): reference configuration; ``trends`` lists the seeds.
        output (str, optional): directory receiving ``trends.json`` and ``runs.csv``.

    Returns:
        dict: trend report with the measured means and a pass flag per trend.
    """
    k_low, k_high = k_bounds(config)
    runs = run_experiments(config)
    means = trend_means(runs, k_low, k_high)
    trends: List[dict] = [trend.check(means) for trend in TRENDS]
    report = {
        "seeds": list(config.trends.seeds),
        "k_low": k_low,
        "k_high": k_high,
        "means": [{"experiment": experiment, "k": side, "f1": value} for (experiment, side), value in means.items()],
        "trends": trends,
        "passed": all(trend["passed"] for trend in trends),
    }
    for trend in trends:
        logger.info(
            "%s %s: %.4f vs %.4f (margin %+.2f)",
            trend["name"],
            "passed" if trend["passed"] else "FAILED",
            trend["measured"],
            trend["reference"],
            trend["required_margin"],
        )
    if output is not None:
        output = Path(output)
        output.mkdir(parents=True, exist_ok=True)
        write_table(runs, output / "runs.csv")
        write_report(report, output / "trends.json")
    return report
