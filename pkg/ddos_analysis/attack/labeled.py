import logging
import os
from typing import List, Sequence, Union

import numpy as np
import pandas as pd

from ddos_analysis.attack.scenario import AttackScenario
from ddos_analysis.cauchy import TruncatedCauchy, derive_attack, sample
from ddos_analysis.exceptions import PipelineError, ScenarioError
from ddos_analysis.ingest.dataset import BENIGN_COLUMNS, BenignDataset, Dataset

logger = logging.getLogger(__name__)

LABELED_COLUMNS = BENIGN_COLUMNS + ["ATTACKED"]


class LabeledDataset(Dataset):
    """
    Benign dataset with injected attacks and an ATTACKED label per (node, timestep).

    Attributes:
        scenarios (List[AttackScenario]): attack windows applied to the data.
    """

    columns = LABELED_COLUMNS

    def __init__(self, frame: pd.DataFrame, t_s: int, scenarios: Union[Sequence[AttackScenario], None] = None) -> None:
        super().__init__(frame, t_s)
        self.frame["ACTIVE"] = self.frame["ACTIVE"].astype(bool)
        self.frame["PACKET"] = self.frame["PACKET"].astype(np.float64)
        self.frame["ATTACKED"] = self.frame["ATTACKED"].astype(bool)
        self.scenarios: List[AttackScenario] = list(scenarios or [])

    def validate(self) -> None:
        """
        Attacked rows are active, inactive rows carry no packets.

        Raises:
            PipelineError: first violating node.
        """
        frame = self.frame
        bad = (frame["ATTACKED"] & ~frame["ACTIVE"]) | (~frame["ACTIVE"] & (frame["PACKET"] != 0)) | (frame["PACKET"] < 0)
        if bad.any():
            raise PipelineError(f"Node {frame.loc[bad, 'NODE'].iloc[0]} has inconsistent labels")

    def label_matrix(self) -> pd.DataFrame:
        return self.matrix("ATTACKED").astype(bool)

    @classmethod
    def from_csv(cls, path: Union[str, os.PathLike], t_s: Union[int, None] = None) -> "LabeledDataset":
        frame = cls.read_frame(path)
        dataset = cls(frame, t_s or cls.infer_timestep(frame))
        dataset.validate()
        return dataset


def check_window(dataset: Dataset, scenario: AttackScenario) -> None:
    """
    Raises:
        ScenarioError: the attack window is not inside the dataset time range.
    """
    if scenario.start < dataset.begin or scenario.end > dataset.end:
        raise ScenarioError(
            f"Scenario {scenario.name} window [{scenario.start}, {scenario.end}) lies outside the dataset range "
            f"[{dataset.begin}, {dataset.end})"
        )


def inject_many(benign: BenignDataset, scenarios: Sequence[AttackScenario], d_benign: TruncatedCauchy) -> LabeledDataset:
    """
    Inject several attack windows into a benign dataset.

    For each scenario, ``ceil(a_r * N)`` nodes are drawn uniformly without
    replacement from the scenario's own stream; inside the window they become
    active, transmit volumes drawn from the attack law derived with ``k`` and
    are labeled as attacked. Attack volumes replace benign ones. Everything
    else is copied unchanged.

    Args:
        benign (BenignDataset): benign traffic.
        scenarios (Sequence[AttackScenario]): windows, applied in order.
        d_benign (TruncatedCauchy): benign packet-volume law.

    Returns:
        LabeledDataset: labeled traffic carrying the scenarios.

    Raises:
        ScenarioError: a window outside the dataset range.
    """
    for scenario in scenarios:
        check_window(benign, scenario)
    frame = benign.frame.copy()
    frame["ATTACKED"] = False
    nodes = np.asarray(benign.nodes)
    node_values = frame["NODE"].to_numpy()
    times = frame["TIME"]
    for scenario in scenarios:
        rng = np.random.default_rng(scenario.seed)
        selected = np.sort(rng.choice(nodes, size=scenario.attacked_count(nodes.size), replace=False))
        mask = (np.isin(node_values, selected) & (times >= scenario.start) & (times < scenario.end)).to_numpy()
        attack_law = derive_attack(d_benign, scenario.k)
        frame.loc[mask, "ACTIVE"] = True
        frame.loc[mask, "PACKET"] = sample(attack_law, rng, int(mask.sum()))
        frame.loc[mask, "ATTACKED"] = True
        logger.debug("%s: %d nodes, %d attacked rows", scenario.name, selected.size, int(mask.sum()))
    labeled = LabeledDataset(frame, benign.t_s, scenarios)
    logger.info("injected %d attack windows, %d attacked rows", len(scenarios), int(labeled.frame["ATTACKED"].sum()))
    return labeled


def inject(benign: BenignDataset, scenario: AttackScenario, d_benign: TruncatedCauchy) -> LabeledDataset:
    """
    Inject a single attack window, see :func:`inject_many`.
    """
    return inject_many(benign, [scenario], d_benign)
