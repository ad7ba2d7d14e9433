import logging
import os
import re
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
import pandas as pd

from ddos_analysis.exceptions import IngestionError
from ddos_analysis.utils.files import atomic_path
from ddos_analysis.utils.seeding import make_rng

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ["NODE", "LAT", "LNG", "TIME", "ACTIVE"]
TIME_FORMAT = "%Y-%m-%dT%H:%M:%S"
DEFAULT_BEGIN = pd.Timestamp("2021-01-01 00:00:00")

_TRUE = {"1", "true", "t", "yes"}
_FALSE = {"0", "false", "f", "no"}
_INTEGER = re.compile(r"^-?\d+$")


@dataclass(frozen=True)
class EventRecord:
    """
    One activity status change of an IoT node.

    Attributes:
        node_id (int, str): node identifier.
        lat (float): latitude [degrees].
        lng (float): longitude [degrees].
        time (pd.Timestamp): time of the change, seconds resolution.
        active (bool): status after the change.
    """

    node_id: Union[int, str]
    lat: float
    lng: float
    time: pd.Timestamp
    active: bool


@dataclass(frozen=True)
class DayNightProfile:
    """
    Diurnal activity model of the synthetic event generator.

    The default durations are the typical per-node mean activity/inactivity
    times observed on the urban deployment: around 100 min active and 80 min
    inactive during the day (08:00-20:00), 80 min active and 220 min inactive
    at night.

    Attributes:
        day_start_hour (int): first hour of the day period.
        day_end_hour (int): first hour of the night period.
        day_active_minutes (float): mean active duration during the day.
        day_inactive_minutes (float): mean inactive duration during the day.
        night_active_minutes (float): mean active duration at night.
        night_inactive_minutes (float): mean inactive duration at night.
        phase_jitter_minutes (float): per-node shift of the day boundaries, uniform in +/- this value.
        tempo_jitter (float): sigma of the per-node lognormal factor applied to every duration.
        center_lat (float): latitude around which nodes are scattered.
        center_lng (float): longitude around which nodes are scattered.
        spread_degrees (float): standard deviation of the node scatter.
    """

    day_start_hour: int = 8
    day_end_hour: int = 20
    day_active_minutes: float = 100.0
    day_inactive_minutes: float = 80.0
    night_active_minutes: float = 80.0
    night_inactive_minutes: float = 220.0
    phase_jitter_minutes: float = 60.0
    tempo_jitter: float = 0.25
    center_lat: float = 34.05
    center_lng: float = -118.25
    spread_degrees: float = 0.05

    def __post_init__(self) -> None:
        if not 0 <= self.day_start_hour < self.day_end_hour <= 24:
            raise ValueError(f"Invalid day window {self.day_start_hour}-{self.day_end_hour}")
        durations = (self.day_active_minutes, self.day_inactive_minutes, self.night_active_minutes, self.night_inactive_minutes)
        if min(durations) <= 0:
            raise ValueError(f"Mean durations must be positive, got {durations}")

    def is_day(self, seconds_of_day: float) -> bool:
        return self.day_start_hour * 3600 <= seconds_of_day % 86400 < self.day_end_hour * 3600

    def mean_minutes(self, day: bool, active: bool) -> float:
        if day:
            return self.day_active_minutes if active else self.day_inactive_minutes
        return self.night_active_minutes if active else self.night_inactive_minutes

    def active_share(self, day: bool) -> float:
        """
        Long-run fraction of time a node is active in the given period.
        """
        on = self.mean_minutes(day, True)
        return on / (on + self.mean_minutes(day, False))


def events_frame(records: Iterable[EventRecord]) -> pd.DataFrame:
    """
    Build an event-log dataframe from records.
    """
    frame = pd.DataFrame(
        [(r.node_id, r.lat, r.lng, pd.Timestamp(r.time), bool(r.active)) for r in records],
        columns=EVENT_COLUMNS,
    )
    frame["TIME"] = pd.to_datetime(frame["TIME"])
    frame["ACTIVE"] = frame["ACTIVE"].astype(bool)
    return frame


def validate_events(events: pd.DataFrame) -> bool:
    """
    Check the event-log invariants for every node.

    Records of a node must be strictly time-ordered in the order given and
    consecutive records must alternate the activity status.

    Raises:
        IngestionError: missing columns, unordered or non-alternating records; names the node.
    """
    missing = [column for column in EVENT_COLUMNS if column not in events.columns]
    if missing:
        raise IngestionError(f"Event log is missing columns {missing}")
    for node, group in events.groupby("NODE", sort=False):
        times = group["TIME"].to_numpy(dtype="datetime64[ns]")
        if np.any(times[1:] <= times[:-1]):
            raise IngestionError(f"Events of node {node} are not strictly time-ordered", node=str(node))
        status = group["ACTIVE"].to_numpy(dtype=bool)
        if np.any(status[1:] == status[:-1]):
            raise IngestionError(f"Events of node {node} do not alternate activity status", node=str(node))
    return True


def synth_events(
    n_nodes: int,
    days: int,
    profile: Union[DayNightProfile, None] = None,
    seed: int = 0,
    begin: pd.Timestamp = DEFAULT_BEGIN,
) -> pd.DataFrame:
    """
    Generate a raw change-event log for ``n_nodes`` nodes over ``days`` days.

    Every node draws alternating on/off durations from exponential laws whose
    means follow the shared day/night profile, shifted by a per-node phase
    and scaled by a per-node tempo. The shared profile makes node activities
    correlated. Each node has an event at ``begin``; node ``i`` uses the
    stream derived from ``(seed, "synth-events", i)``.

    Args:
        n_nodes (int): number of nodes, identifiers ``1..n_nodes``.
        days (int): number of whole days to cover.
        profile (DayNightProfile, optional): diurnal model, defaults to the observed durations.
        seed (int): master seed.
        begin (pd.Timestamp): start of the log, midnight recommended.

    Returns:
        pd.DataFrame: event log with columns NODE, LAT, LNG, TIME, ACTIVE.
    """
    if not isinstance(n_nodes, (int, np.integer)) or n_nodes < 1:
        raise ValueError(f"n_nodes must be a positive integer, not {n_nodes!r}")
    if not isinstance(days, (int, np.integer)) or days < 1:
        raise ValueError(f"days must be a positive integer, not {days!r}")
    profile = profile or DayNightProfile()
    begin = pd.Timestamp(begin).floor("s")
    horizon = int(days) * 86400
    begin_of_day = (begin - begin.normalize()).total_seconds()

    frames = []
    for node in range(1, n_nodes + 1):
        rng = make_rng(seed, "synth-events", node)
        phase = rng.uniform(-profile.phase_jitter_minutes, profile.phase_jitter_minutes) * 60
        tempo = float(rng.lognormal(0.0, profile.tempo_jitter))
        lat, lng = rng.normal(0.0, profile.spread_degrees, 2) + (profile.center_lat, profile.center_lng)

        day = profile.is_day(begin_of_day - phase)
        active = bool(rng.random() < profile.active_share(day))
        offsets, statuses = [], []
        offset = 0
        while offset < horizon:
            offsets.append(offset)
            statuses.append(active)
            day = profile.is_day(begin_of_day + offset - phase)
            minutes = rng.exponential(profile.mean_minutes(day, active) * tempo)
            offset += max(60, int(round(minutes * 60)))
            active = not active

        frames.append(
            pd.DataFrame(
                {
                    "NODE": node,
                    "LAT": round(float(lat), 6),
                    "LNG": round(float(lng), 6),
                    "TIME": begin + pd.to_timedelta(np.asarray(offsets, dtype=np.int64), unit="s"),
                    "ACTIVE": statuses,
                }
            )
        )
    events = pd.concat(frames, ignore_index=True)[EVENT_COLUMNS]
    logger.info("synthesized %d events for %d nodes over %d days", len(events), n_nodes, days)
    return events


def parse_node_ids(values: pd.Series) -> pd.Series:
    """
    Integer node identifiers when every value is an integer literal, strings otherwise.
    """
    text = values.astype(str).str.strip()
    if len(text) and text.map(lambda v: bool(_INTEGER.match(v))).all():
        return text.astype(np.int64)
    return text


def _bad_line(mask: pd.Series) -> Union[int, None]:
    if not mask.any():
        return None
    # header is line 1
    return int(np.flatnonzero(mask.to_numpy())[0]) + 2


def parse_table(raw: pd.DataFrame, columns: list, source: str) -> pd.DataFrame:
    """
    Convert a string-typed CSV table into typed columns.

    Raises:
        IngestionError: missing columns or the first malformed row, with its line number.
    """
    missing = [column for column in columns if column not in raw.columns]
    if missing:
        raise IngestionError(f"{source}: missing columns {missing}")
    frame = pd.DataFrame(index=raw.index)

    empty = raw["NODE"].astype(str).str.strip() == ""
    line = _bad_line(empty)
    if line is not None:
        raise IngestionError(f"{source}: line {line}: empty NODE", line=line)
    frame["NODE"] = parse_node_ids(raw["NODE"])

    for column in [c for c in ("LAT", "LNG", "PACKET") if c in columns]:
        frame[column] = pd.to_numeric(raw[column].str.strip(), errors="coerce")
        line = _bad_line(frame[column].isna())
        if line is not None:
            raise IngestionError(f"{source}: line {line}: {column} is not a number", line=line)

    frame["TIME"] = pd.to_datetime(raw["TIME"].str.strip(), errors="coerce", format="ISO8601")
    line = _bad_line(frame["TIME"].isna())
    if line is not None:
        raise IngestionError(f"{source}: line {line}: TIME is not an ISO-8601 timestamp", line=line)

    for column in [c for c in ("ACTIVE", "ATTACKED") if c in columns]:
        flags = raw[column].str.strip().str.lower()
        line = _bad_line(~flags.isin(_TRUE | _FALSE))
        if line is not None:
            raise IngestionError(f"{source}: line {line}: {column} must be 0 or 1", line=line)
        frame[column] = flags.isin(_TRUE)
    return frame[columns]


def read_events_csv(path: Union[str, os.PathLike]) -> pd.DataFrame:
    """
    Load and validate a raw event log written with headers NODE,LAT,LNG,TIME,ACTIVE.
    """
    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    events = parse_table(raw, EVENT_COLUMNS, str(path))
    validate_events(events)
    logger.info("loaded %d events from %s", len(events), path)
    return events


def format_table(frame: pd.DataFrame) -> pd.DataFrame:
    """
    CSV representation: ISO-8601 TIME and 0/1 flags.
    """
    out = frame.copy()
    out["TIME"] = pd.to_datetime(out["TIME"]).dt.strftime(TIME_FORMAT)
    for column in [c for c in ("ACTIVE", "ATTACKED") if c in out.columns]:
        out[column] = out[column].astype(int)
    return out


def write_events_csv(events: pd.DataFrame, path: Union[str, os.PathLike]) -> None:
    with atomic_path(path) as tmp:
        format_table(events[EVENT_COLUMNS]).to_csv(tmp, index=False)
