import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Hashable, List, Union

import numpy as np
import pandas as pd

from ddos_analysis.attack import LabeledDataset
from ddos_analysis.exceptions import ConfigurationError, PipelineError
from ddos_analysis.features import ArchitectureKind, TrainingView, build_general, select_features, window
from ddos_analysis.nn.checkpoint import load_checkpoint, save_checkpoint
from ddos_analysis.nn.training import TrainedModel
from ddos_analysis.utils.files import atomic_write

logger = logging.getLogger(__name__)

SHARED = "all"


@dataclass
class Detector:
    """
    Trained detectors of one architecture.

    MM architectures hold one model per node, OM architectures a single
    model under the key ``"all"``.

    Attributes:
        arch (ArchitectureKind): detector architecture.
        n_t (int): window length.
        models (Dict[Hashable, TrainedModel]): trained models by node (MM) or ``"all"`` (OM).
        kept (Dict[Hashable, List]): nodes whose volumes each node's model sees (WC).
        scaling (Dict[Hashable, dict]): min-max scaling fitted on each model's training view.
    """

    arch: ArchitectureKind
    n_t: int
    models: Dict[Hashable, TrainedModel]
    kept: Dict[Hashable, List] = field(default_factory=dict)
    scaling: Dict[Hashable, dict] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.arch = ArchitectureKind.parse(self.arch)

    def views(self, labeled: LabeledDataset) -> Dict[Hashable, TrainingView]:
        """
        Windows of the labeled dataset as each model sees them.
        """
        general = build_general(labeled)
        if self.arch.multiple_models:
            missing = [node for node in labeled.nodes if node not in self.models]
            if missing:
                raise PipelineError(f"No trained model for nodes {missing}")
            return {
                node: window(select_features(general, self.arch, node, self.kept.get(node)), self.n_t) for node in labeled.nodes
            }
        return {SHARED: window(select_features(general, self.arch, None, self.kept.get(SHARED)), self.n_t)}

    def scale(self, key: Hashable, samples: np.ndarray) -> np.ndarray:
        scaling = self.scaling.get(key)
        if not scaling:
            return samples
        return (samples - np.asarray(scaling["low"])) / np.asarray(scaling["span"])

    def predict(self, labeled: LabeledDataset) -> pd.DataFrame:
        """
        Attack probability of every (timestep, node).

        Timesteps without a complete window are NaN.

        Returns:
            pd.DataFrame: TIME x NODE probabilities.
        """
        index = labeled.timestamps
        columns = pd.Index(labeled.nodes)
        values = np.full((len(index), len(columns)), np.nan)
        for key, view in self.views(labeled).items():
            if len(view) == 0:
                continue
            scores = self.models[key].predict(self.scale(key, view.samples))
            values[index.get_indexer(pd.DatetimeIndex(view.times)), columns.get_indexer(view.nodes)] = scores
        probabilities = pd.DataFrame(values, index=index, columns=columns)
        probabilities.index.name = "TIME"
        logger.info("predicted %d windows with %s", int(probabilities.notna().to_numpy().sum()), self.arch.value)
        return probabilities

    def save(self, directory: Union[str, os.PathLike]) -> Path:
        """
        Write one checkpoint per model plus ``detector.json``.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files = {}
        for key, trained in self.models.items():
            files[str(key)] = save_checkpoint(trained, directory / f"model_{key}.ckpt").name
        manifest = {
            "arch": self.arch.value,
            "n_t": self.n_t,
            "models": files,
            "kept": {str(key): [_plain(node) for node in nodes] for key, nodes in self.kept.items()},
            "scaling": {str(key): value for key, value in self.scaling.items()},
        }
        with atomic_write(directory / "detector.json") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
        logger.info("saved %d checkpoints to %s", len(files), directory)
        return directory

    @classmethod
    def load(cls, directory: Union[str, os.PathLike]) -> "Detector":
        directory = Path(directory)
        manifest_path = directory / "detector.json"
        if not manifest_path.exists():
            raise ConfigurationError(f"{directory} holds no trained detector")
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        models = {_node_key(key): load_checkpoint(directory / name) for key, name in manifest["models"].items()}
        return cls(
            arch=ArchitectureKind.parse(manifest["arch"]),
            n_t=int(manifest["n_t"]),
            models=models,
            kept={_node_key(key): [_node_key(node) for node in nodes] for key, nodes in manifest["kept"].items()},
            scaling={_node_key(key): value for key, value in manifest["scaling"].items()},
        )


def _plain(value):
    return value.item() if hasattr(value, "item") else value


def _node_key(value):
    if isinstance(value, str) and value.lstrip("-").isdigit():
        return int(value)
    return value
