import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Hashable, List, Sequence, Tuple, Union

import pandas as pd
from joblib import Parallel, delayed

from ddos_analysis.attack import AttackCombination, AttackScenario, LabeledDataset, daily_scenarios, inject_many
from ddos_analysis.cli.config import ExperimentConfig
from ddos_analysis.eval import (
    METRIC_COLUMNS,
    MetricsReport,
    SessionStats,
    detector_scores,
    evaluate,
    flatten_scores,
    mean_over_nodes,
    node_reports,
    report_table,
    session_stats,
    timeline,
)
from ddos_analysis.exceptions import ConfigurationError
from ddos_analysis.features import (
    ArchitectureKind,
    build_general,
    concat_views,
    scale_views,
    select_features,
    split_days,
    window,
)
from ddos_analysis.ingest import BenignDataset, assign_volumes, read_events_csv, resample, synth_events
from ddos_analysis.nn import Detector, TrainedModel, build_spec, train
from ddos_analysis.nn.detector import SHARED
from ddos_analysis.select import SelectionKind, SelectionMethod, select_nodes

logger = logging.getLogger(__name__)


def make_events(config: ExperimentConfig) -> pd.DataFrame:
    """
    Raw change events: read from the configured CSV or synthesized.
    """
    if config.ingest.events:
        return read_events_csv(config.ingest.events)
    return synth_events(config.ingest.nodes, config.ingest.days, seed=config.stage_seed("events"), begin=config.begin)


def make_benign(config: ExperimentConfig, events: Union[pd.DataFrame, None] = None) -> BenignDataset:
    """
    Resample events onto the timestep grid and draw benign volumes.
    """
    events = make_events(config) if events is None else events
    grid = resample(events, config.ingest.t_s, config.begin, config.end)
    benign = assign_volumes(grid, config.d_benign, seed=config.stage_seed("volumes"), t_s=config.ingest.t_s)
    logger.info("benign dataset: %d nodes, %d timesteps", len(benign.nodes), len(benign.timestamps))
    return benign


def make_labeled(config: ExperimentConfig, benign: BenignDataset, combination: AttackCombination) -> LabeledDataset:
    """
    Inject one attack window per day of an attack combination.
    """
    scenarios = daily_scenarios(combination, benign.begin, benign.end, config.stage_seed("scenarios"))
    return inject_many(benign, scenarios, config.d_benign)


def make_labeled_sets(
    config: ExperimentConfig,
    benign: BenignDataset,
    combinations: Union[Sequence[AttackCombination], None] = None,
) -> Dict[str, LabeledDataset]:
    """
    Labeled dataset of every attack combination, keyed by combination name.
    """
    combinations = config.combinations if combinations is None else combinations
    return {combination.name: make_labeled(config, benign, combination) for combination in combinations}


def testing_bounds(config: ExperimentConfig, begin: pd.Timestamp) -> Tuple[pd.Timestamp, pd.Timestamp]:
    """
    First timestep whose window lies in the testing days, and the end of the testing days.
    """
    features = config.features
    first_day = pd.Timestamp(begin).normalize()
    test_begin = first_day + pd.Timedelta(days=features.train_days + features.val_days)
    test_end = test_begin + pd.Timedelta(days=features.test_days)
    return test_begin + pd.Timedelta(seconds=(features.n_t - 1) * config.ingest.t_s), test_end


def training_volumes(config: ExperimentConfig, labeled: LabeledDataset) -> pd.DataFrame:
    """
    TIME x NODE volumes of the training days, the only ones node selection may look at.
    """
    volumes = labeled.volume_matrix()
    end = labeled.begin.normalize() + pd.Timedelta(days=config.features.train_days)
    return volumes[volumes.index < end]


def kept_sets(
    config: ExperimentConfig,
    labeled: LabeledDataset,
    method: Union[SelectionMethod, None] = None,
    trial: int = 0,
) -> Dict[Hashable, List]:
    """
    Kept-node set of every target node for MM-WC detectors; other architectures keep none.
    """
    if config.arch is not ArchitectureKind.MM_WC:
        return {}
    method = method or config.selection_method()
    volumes = training_volumes(config, labeled) if method.kind is SelectionKind.PEARSON else None
    locations = labeled.locations() if method.kind is SelectionKind.NEAREST_NEIGHBOR else None
    kept = {}
    for node in labeled.nodes:
        trials = select_nodes(method, node, labeled.nodes, volumes, locations, seed=config.stage_seed("select"))
        kept[node] = trials[trial % len(trials)]
    return kept


def fit_detector_model(
    config: ExperimentConfig,
    generals: Union[pd.DataFrame, Sequence[pd.DataFrame]],
    key: Hashable,
    kept: Union[List, None] = None,
) -> Tuple[Hashable, TrainedModel, dict]:
    """
    Train the model of one node (MM) or the shared model (OM) on the training days.

    With several general datasets (one per attack combination) the training
    and validation windows of all of them are pooled before training.

    Returns:
        Tuple[Hashable, TrainedModel, dict]: model key, trained model and the feature scaling.
    """
    if isinstance(generals, pd.DataFrame):
        generals = [generals]
    target = None if key == SHARED else key
    features = config.features
    train_views, val_views = [], []
    for general in generals:
        rows = select_features(general, config.arch, target, kept)
        train_part, val_part, _ = split_days(
            window(rows, features.n_t),
            features.train_days,
            features.val_days,
            features.test_days,
            seed=config.stage_seed("split", key),
        )
        train_views.append(train_part)
        val_views.append(val_part)
    if len(generals) == 1:
        train_view, val_view = train_views[0], val_views[0]
    else:
        train_view = concat_views(train_views, seed=config.stage_seed("pool", key))
        val_view = concat_views(val_views, shuffle=False)
    scaling = {}
    if config.features.normalize:
        train_view, val_view = scale_views(train_view, val_view)
        scaling = train_view.meta["scaling"]
    train_config = config.train_config(key)
    if train_view.positives == 0:
        logger.warning("no attacked window in the training days of %s, fitting a benign-only model", key)
        train_config = replace(train_config, class_weights=(1.0, 1.0))
    spec = build_spec(config.model_kind, config.arch, (config.features.n_t, train_view.width))
    trained = train(spec, train_view, train_config, validation=val_view)
    return key, trained, scaling


def train_detector(
    config: ExperimentConfig,
    labeled: Union[LabeledDataset, Sequence[LabeledDataset]],
    method: Union[SelectionMethod, None] = None,
    trial: int = 0,
) -> Detector:
    """
    Train one model per node (MM) or one shared model (OM) on the training days.

    Given several labeled datasets, one per attack combination, every model
    trains on the pooled windows of all of them. Kept-node sets come from
    the first dataset.

    Per-node models run through joblib with ``config.n_jobs`` workers; every
    model derives its seeds from its node id, so the worker count never
    changes the result.
    """
    datasets = [labeled] if isinstance(labeled, LabeledDataset) else list(labeled)
    if not datasets:
        raise ConfigurationError("Training needs at least one labeled dataset")
    generals = [build_general(dataset) for dataset in datasets]
    kept = kept_sets(config, datasets[0], method, trial)
    keys = datasets[0].nodes if config.arch.multiple_models else [SHARED]
    results = Parallel(n_jobs=config.n_jobs)(delayed(fit_detector_model)(config, generals, key, kept.get(key)) for key in keys)
    models = {key: trained for key, trained, _ in results}
    scaling = {key: value for key, _, value in results if value}
    logger.info("trained %d %s/%s models", len(models), config.model_kind.value, config.arch.value)
    return Detector(config.arch, config.features.n_t, models, kept=kept, scaling=scaling)


@dataclass
class Evaluation:
    """
    Test-day results of a detector on one attack combination.

    ``report`` pools every node's testing cells and carries the ROC curve;
    ``nodes`` holds one report per node, whose unweighted mean is the
    combination's score (:attr:`summary`).
    """

    combination: AttackCombination
    report: MetricsReport
    sessions: SessionStats
    timeline: pd.DataFrame
    probabilities: pd.DataFrame = field(repr=False)
    nodes: Dict[Hashable, MetricsReport] = field(default_factory=dict, repr=False)

    def keys(self) -> dict:
        combination = self.combination
        return {
            "COMBINATION": combination.name,
            "AS": combination.start_time,
            "AD": combination.duration,
            "AR": combination.node_ratio,
            "K": combination.k,
        }

    def node_table(self) -> pd.DataFrame:
        return report_table([({**self.keys(), "NODE": node}, report) for node, report in self.nodes.items()])

    @property
    def summary(self) -> Dict[str, float]:
        row = mean_over_nodes(self.node_table(), list(self.keys())).iloc[0]
        return {column: float(row[column]) for column in METRIC_COLUMNS}

    @property
    def f1(self) -> float:
        return self.summary["F1"]

    def record(self) -> dict:
        # ROC points go to their own CSV
        pooled = self.report.to_dict()
        pooled.pop("roc_points", None)
        return {
            "combination": self.combination.to_dict(),
            "name": self.combination.name,
            "metrics": {name.lower(): value for name, value in self.summary.items()},
            "pooled": pooled,
            "sessions": self.sessions.to_dict(),
        }


def evaluate_combination(
    config: ExperimentConfig,
    detector: Detector,
    labeled: LabeledDataset,
    combination: AttackCombination,
) -> Evaluation:
    """
    Metrics, session statistics and timeline of a detector on the testing days.
    """
    probabilities, labels = detector_scores(detector, labeled)
    first, end = testing_bounds(config, labeled.begin)
    rows = (probabilities.index >= first) & (probabilities.index < end)
    probabilities, labels = probabilities[rows], labels[rows]
    threshold = config.evaluate.threshold
    report = evaluate(*flatten_scores(probabilities, labels), threshold)
    nodes = node_reports(probabilities, labels, threshold)
    scenarios = testing_scenarios(config, labeled, combination)
    sessions = session_stats(probabilities, labels, scenarios, threshold)
    frame = timeline(probabilities, labels, scenarios[0] if scenarios else None, threshold)
    evaluation = Evaluation(combination, report, sessions, frame, probabilities, nodes)
    logger.info("%s: node-mean F1 %.4f, pooled AUC %.4f", combination.name, evaluation.f1, report.auc)
    return evaluation


def testing_scenarios(config: ExperimentConfig, labeled: LabeledDataset, combination: AttackCombination) -> List[AttackScenario]:
    """
    Attack windows of a combination that fall in the testing days.
    """
    first, end = testing_bounds(config, labeled.begin)
    scenarios = daily_scenarios(combination, labeled.begin, labeled.end, config.stage_seed("scenarios"))
    return [scenario for scenario in scenarios if scenario.start >= first.normalize() and scenario.end <= end]


def run_pooled(
    config: ExperimentConfig,
    labeled_sets: Dict[str, LabeledDataset],
    method: Union[SelectionMethod, None] = None,
    trial: int = 0,
    evaluate_on: Union[Sequence[AttackCombination], None] = None,
) -> Tuple[Detector, List[Evaluation]]:
    """
    Train one detector on the pooled attack combinations and evaluate it on each.

    Args:
        config (ExperimentConfig): experiment settings.
        labeled_sets (Dict[str, LabeledDataset]): output of :func:`make_labeled_sets`.
        method (SelectionMethod, optional): node selection, the configured one when omitted.
        trial (int): random-selection trial.
        evaluate_on (Sequence[AttackCombination], optional): combinations to evaluate, all configured ones by default.

    Returns:
        Tuple[Detector, List[Evaluation]]: trained detector and one evaluation per combination.
    """
    detector = train_detector(config, list(labeled_sets.values()), method, trial)
    combinations = config.combinations if evaluate_on is None else evaluate_on
    evaluations = [evaluate_combination(config, detector, labeled_sets[c.name], c) for c in combinations]
    return detector, evaluations
