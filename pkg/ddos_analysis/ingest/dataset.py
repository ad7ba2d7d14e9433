import logging
import os
from abc import ABC, abstractmethod
from typing import List, Union

import numpy as np
import pandas as pd

from ddos_analysis.exceptions import IngestionError, PipelineError
from ddos_analysis.ingest.events import format_table, parse_table
from ddos_analysis.utils.files import atomic_path

logger = logging.getLogger(__name__)

BENIGN_COLUMNS = ["NODE", "LAT", "LNG", "TIME", "ACTIVE", "PACKET"]


class Dataset(ABC):
    """
    Abstract base class for fixed-timestep node x time tables.

    The frame is kept sorted by NODE then TIME with a fresh range index.
    """

    columns: List[str] = BENIGN_COLUMNS

    def __init__(self, frame: pd.DataFrame, t_s: int) -> None:
        missing = [column for column in self.columns if column not in frame.columns]
        if missing:
            raise PipelineError(f"{type(self).__name__} is missing columns {missing}")
        if t_s <= 0:
            raise PipelineError(f"Timestep must be positive, not {t_s}")
        self.t_s = int(t_s)
        self.frame = frame[self.columns].sort_values(["NODE", "TIME"], kind="stable").reset_index(drop=True)

    @abstractmethod
    def validate(self) -> None:
        """
        Check the row invariants of the dataset.
        """
        pass

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def nodes(self) -> list:
        return sorted(self.frame["NODE"].unique().tolist())

    @property
    def timestamps(self) -> pd.DatetimeIndex:
        return pd.DatetimeIndex(np.unique(self.frame["TIME"].to_numpy(dtype="datetime64[ns]")))

    @property
    def begin(self) -> pd.Timestamp:
        return self.timestamps[0]

    @property
    def end(self) -> pd.Timestamp:
        """
        Exclusive end of the covered range.
        """
        return self.timestamps[-1] + pd.Timedelta(seconds=self.t_s)

    def check_complete(self) -> None:
        """
        Check that every node has a row at every timestep.

        Raises:
            PipelineError: duplicated or missing (node, timestep) cells.
        """
        if self.frame.duplicated(["NODE", "TIME"]).any():
            raise PipelineError("Dataset has duplicated (NODE, TIME) cells")
        expected = len(self.nodes) * len(self.timestamps)
        if len(self.frame) != expected:
            raise PipelineError(f"Dataset has {len(self.frame)} rows, a complete grid needs {expected}")

    def matrix(self, column: str) -> pd.DataFrame:
        """
        Pivot one column into a TIME x NODE table.
        """
        return self.frame.pivot(index="TIME", columns="NODE", values=column).sort_index(axis=0).sort_index(axis=1)

    def volume_matrix(self) -> pd.DataFrame:
        return self.matrix("PACKET").astype(np.float64)

    def activity_matrix(self) -> pd.DataFrame:
        return self.matrix("ACTIVE").astype(bool)

    def locations(self) -> pd.DataFrame:
        """
        One (LAT, LNG) row per node, indexed by NODE.
        """
        return self.frame.groupby("NODE")[["LAT", "LNG"]].first().sort_index()

    def day_index(self) -> pd.Series:
        """
        Whole-day number of every row counted from the first day of the dataset.
        """
        days = self.frame["TIME"].dt.normalize()
        return ((days - days.min()) // pd.Timedelta(days=1)).astype(int)

    def to_csv(self, path: Union[str, os.PathLike]) -> None:
        with atomic_path(path) as tmp:
            format_table(self.frame).to_csv(tmp, index=False)
        logger.info("wrote %d rows to %s", len(self.frame), path)

    @classmethod
    def read_frame(cls, path: Union[str, os.PathLike]) -> pd.DataFrame:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
        return parse_table(raw, cls.columns, str(path))

    @staticmethod
    def infer_timestep(frame: pd.DataFrame) -> int:
        times = np.unique(frame["TIME"].to_numpy(dtype="datetime64[ns]"))
        if times.size < 2:
            raise IngestionError("Cannot infer the timestep from fewer than two timestamps")
        return int(np.min(np.diff(times)) / np.timedelta64(1, "s"))


class BenignDataset(Dataset):
    """
    Per-node, per-timestep activity and packet volume of benign traffic.
    """

    columns = BENIGN_COLUMNS

    def __init__(self, frame: pd.DataFrame, t_s: int) -> None:
        super().__init__(frame, t_s)
        self.frame["ACTIVE"] = self.frame["ACTIVE"].astype(bool)
        self.frame["PACKET"] = self.frame["PACKET"].astype(np.float64)

    def validate(self) -> None:
        """
        Inactive rows carry no packets and volumes are non-negative.

        Raises:
            PipelineError: first violating node.
        """
        bad = (~self.frame["ACTIVE"] & (self.frame["PACKET"] != 0)) | (self.frame["PACKET"] < 0)
        if bad.any():
            node = self.frame.loc[bad, "NODE"].iloc[0]
            raise PipelineError(f"Node {node} has an inconsistent PACKET value")

    @classmethod
    def from_csv(cls, path: Union[str, os.PathLike], t_s: Union[int, None] = None) -> "BenignDataset":
        frame = cls.read_frame(path)
        dataset = cls(frame, t_s or cls.infer_timestep(frame))
        dataset.validate()
        return dataset
