import dataclasses
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Union

import pandas as pd
import yaml

from ddos_analysis.attack import AttackCombination, combination_grid
from ddos_analysis.cauchy import TruncatedCauchy
from ddos_analysis.exceptions import ConfigurationError, DDoSAnalysisError
from ddos_analysis.features import ArchitectureKind
from ddos_analysis.nn import ModelKind, TrainConfig
from ddos_analysis.select import SelectionMethod
from ddos_analysis.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).parent / "configs"
REFERENCE_CONFIG = CONFIG_DIR / "reference.yaml"


@dataclass
class IngestConfig:
    """
    Raw events: synthesized when ``events`` is empty, read from CSV otherwise.
    """

    nodes: int = 20
    days: int = 8
    begin: str = "2021-01-01 00:00:00"
    t_s: int = 600
    events: Optional[str] = None


@dataclass
class BenignConfig:
    """
    Truncated Cauchy law of benign packet volumes.
    """

    location: float = 10.0
    scale: float = 3.0
    low: float = 0.0
    high: float = 100.0


@dataclass
class AttackConfig:
    start_times: List[str] = field(default_factory=lambda: ["02:00", "14:00"])
    durations: List[int] = field(default_factory=lambda: [14400, 28800])
    ratios: List[float] = field(default_factory=lambda: [0.5, 1.0])
    ks: List[float] = field(default_factory=lambda: [0.0, 1.0])


@dataclass
class FeatureConfig:
    n_t: int = 10
    train_days: int = 4
    val_days: int = 1
    test_days: int = 3
    normalize: bool = False


@dataclass
class SelectionConfig:
    method: str = "all"
    n: int = 5
    trials: int = 1
    absolute: bool = False


@dataclass
class ModelConfig:
    kind: str = "LSTM"
    arch: str = "MM-WC"


@dataclass
class TrainSection:
    epochs: int = 3
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    autoencoder_epochs: Optional[int] = None


@dataclass
class EvaluateConfig:
    """
    Decision threshold and the optional a_r sweep (skipped when ``sweep_ratios`` is empty).
    """

    threshold: float = 0.5
    sweep_ratios: List[float] = field(default_factory=list)
    sweep_ks: List[float] = field(default_factory=list)
    sweep_durations: List[int] = field(default_factory=list)
    sweep_start: str = "02:00"


@dataclass
class TrendConfig:
    seeds: List[int] = field(default_factory=lambda: [0, 1, 2])
    random_trials: int = 5
    selection_n: int = 5


@dataclass
class ExperimentConfig:
    """
    Every setting of an experiment, loaded from and dumped to YAML.

    Sections mirror the pipeline stages. Every stochastic stage derives its
    seed from ``seed`` and its stage name (:meth:`stage_seed`).
    """

    seed: int = 0
    n_jobs: int = 1
    output: str = "results"
    ingest: IngestConfig = field(default_factory=IngestConfig)
    benign: BenignConfig = field(default_factory=BenignConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainSection = field(default_factory=TrainSection)
    evaluate: EvaluateConfig = field(default_factory=EvaluateConfig)
    trends: TrendConfig = field(default_factory=TrendConfig)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """
        Check values across sections by building the objects they describe.

        Raises:
            ConfigurationError: first inconsistent setting.
        """
        try:
            _ = (self.d_benign, self.combinations, self.train_config(), self.selection_method(), self.model_kind, self.arch)
        except ConfigurationError:
            raise
        except DDoSAnalysisError as exc:
            raise ConfigurationError(str(exc)) from exc
        if self.ingest.t_s <= 0 or 86400 % self.ingest.t_s:
            raise ConfigurationError(f"t_s must divide a day, not {self.ingest.t_s}")
        if self.features.n_t < 1:
            raise ConfigurationError(f"n_t must be positive, not {self.features.n_t}")
        split = self.features.train_days + self.features.val_days + self.features.test_days
        if self.ingest.events is None and split > self.ingest.days:
            raise ConfigurationError(f"The {split}-day split does not fit in {self.ingest.days} days")
        if self.ingest.events is not None and not Path(self.ingest.events).exists():
            raise ConfigurationError(f"Event log {self.ingest.events} does not exist")

    @property
    def begin(self) -> pd.Timestamp:
        return pd.Timestamp(self.ingest.begin)

    @property
    def end(self) -> pd.Timestamp:
        return self.begin + pd.Timedelta(days=self.ingest.days)

    @property
    def d_benign(self) -> TruncatedCauchy:
        return TruncatedCauchy(**dataclasses.asdict(self.benign))

    @property
    def combinations(self) -> List[AttackCombination]:
        attack = self.attack
        return combination_grid(attack.start_times, attack.durations, attack.ratios, attack.ks)

    @property
    def arch(self) -> ArchitectureKind:
        return ArchitectureKind.parse(self.model.arch)

    @property
    def model_kind(self) -> ModelKind:
        return ModelKind.parse(self.model.kind)

    def train_config(self, *parts) -> TrainConfig:
        return TrainConfig(seed=self.stage_seed("train", *parts), **dataclasses.asdict(self.train))

    def selection_method(self) -> SelectionMethod:
        selection = self.selection
        return SelectionMethod(kind=selection.method, n=selection.n, trials=selection.trials, absolute=selection.absolute)

    def stage_seed(self, stage: str, *parts) -> int:
        return derive_seed(self.seed, stage, *parts)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, record: Union[dict, None]) -> "ExperimentConfig":
        """
        Build a config from nested mappings; missing keys keep their defaults.

        Raises:
            ConfigurationError: unknown section or key, or a section that is not a mapping.
        """
        return _build(cls, record or {}, "")

    @classmethod
    def from_yaml(cls, path: Union[str, os.PathLike]) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Config file {path} does not exist")
        try:
            record = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path} is not valid YAML: {exc}") from exc
        logger.debug("loaded config %s", path)
        return cls.from_dict(record)

    def to_yaml(self, path: Union[str, os.PathLike, None] = None) -> str:
        text = yaml.safe_dump(self.to_dict(), sort_keys=False)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def with_overrides(self, overrides: Iterable[str]) -> "ExperimentConfig":
        """
        Copy with ``section.key=value`` overrides applied; values are parsed as YAML.
        """
        record = self.to_dict()
        for override in overrides:
            key, sep, raw = override.partition("=")
            if not sep or not key:
                raise ConfigurationError(f"Override {override!r} is not of the form section.key=value")
            *sections, name = key.strip().split(".")
            target = record
            for section in sections:
                if not isinstance(target.get(section), dict):
                    raise ConfigurationError(f"Unknown config section {section!r} in {override!r}")
                target = target[section]
            if name not in target:
                raise ConfigurationError(f"Unknown config key {key!r}")
            target[name] = yaml.safe_load(raw)
        return type(self).from_dict(record)


def _build(cls, record, prefix: str):
    if not isinstance(record, dict):
        raise ConfigurationError(f"Config section {prefix or 'root'} must be a mapping, not {type(record).__name__}")
    fields = {item.name: item for item in dataclasses.fields(cls)}
    unknown = sorted(set(record) - set(fields))
    if unknown:
        raise ConfigurationError(f"Unknown config keys {[prefix + key for key in unknown]}")
    values = {}
    for name, value in record.items():
        default = fields[name].default_factory() if fields[name].default_factory is not dataclasses.MISSING else None
        if dataclasses.is_dataclass(default):
            values[name] = _build(type(default), value, f"{prefix}{name}.")
        else:
            values[name] = value
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigurationError(f"Invalid config section {prefix or 'root'}: {exc}") from exc
