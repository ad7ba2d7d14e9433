import logging
from typing import Union

import numpy as np
import pandas as pd

from ddos_analysis.cauchy import TruncatedCauchy, sample
from ddos_analysis.exceptions import IngestionError
from ddos_analysis.ingest.dataset import BenignDataset
from ddos_analysis.ingest.events import EVENT_COLUMNS, DayNightProfile, validate_events
from ddos_analysis.utils.seeding import make_rng

logger = logging.getLogger(__name__)

GRID_COLUMNS = ["NODE", "LAT", "LNG", "TIME", "ACTIVE"]


def timestep_grid(t_s: int, begin: pd.Timestamp, end: pd.Timestamp) -> pd.DatetimeIndex:
    """
    Timesteps in ``[begin, end)`` with stride ``t_s`` seconds.
    """
    if not isinstance(t_s, (int, np.integer)) or t_s <= 0:
        raise IngestionError(f"Timestep must be a positive number of seconds, not {t_s!r}")
    begin, end = pd.Timestamp(begin), pd.Timestamp(end)
    if begin >= end:
        raise IngestionError(f"Begin {begin} must precede end {end}")
    return pd.date_range(begin, end, freq=pd.Timedelta(seconds=int(t_s)), inclusive="left")


def resample(events: pd.DataFrame, t_s: int, begin: pd.Timestamp, end: pd.Timestamp) -> pd.DataFrame:
    """
    Turn a change-event log into a node x timestep activity grid.

    The status at timestep ``t`` is the status of the latest event at or
    before ``t``. Nodes without an event before a timestep are inactive
    there. Every node gets exactly one row per timestep, so nodes with many
    status changes are not over-represented.

    Args:
        events (pd.DataFrame): event log, NODE, LAT, LNG, TIME, ACTIVE.
        t_s (int): timestep [s].
        begin (pd.Timestamp): first timestep.
        end (pd.Timestamp): exclusive end.

    Returns:
        pd.DataFrame: grid with columns NODE, LAT, LNG, TIME, ACTIVE sorted by NODE then TIME.

    Raises:
        IngestionError: unordered or non-alternating events (naming the node), invalid window.
    """
    times = timestep_grid(t_s, begin, end)
    validate_events(events)
    grid_times = times.to_numpy(dtype="datetime64[ns]")
    frames = []
    for node, group in events.groupby("NODE", sort=True):
        event_times = group["TIME"].to_numpy(dtype="datetime64[ns]")
        status = group["ACTIVE"].to_numpy(dtype=bool)
        latest = np.searchsorted(event_times, grid_times, side="right") - 1
        active = np.where(latest >= 0, status[np.maximum(latest, 0)], False)
        frames.append(
            pd.DataFrame(
                {
                    "NODE": node,
                    "LAT": group["LAT"].iloc[-1],
                    "LNG": group["LNG"].iloc[-1],
                    "TIME": times,
                    "ACTIVE": active,
                }
            )
        )
    if not frames:
        raise IngestionError("Event log is empty")
    grid = pd.concat(frames, ignore_index=True)[GRID_COLUMNS]
    logger.info("resampled %d nodes into %d timesteps of %d s", len(frames), len(times), t_s)
    return grid


def events_from_grid(grid: pd.DataFrame) -> pd.DataFrame:
    """
    Change-event log implied by an activity grid.

    The first timestep of every node is kept as an event, then every status change.
    """
    ordered = grid.sort_values(["NODE", "TIME"], kind="stable")
    changed = ordered.groupby("NODE")["ACTIVE"].transform(lambda s: s.ne(s.shift()))
    return ordered.loc[changed.astype(bool), EVENT_COLUMNS].reset_index(drop=True)


def assign_volumes(grid: pd.DataFrame, d_benign: TruncatedCauchy, seed: int, t_s: Union[int, None] = None) -> BenignDataset:
    """
    Generate the packet volume of every active cell.

    Active cells get an i.i.d. draw from the benign truncated Cauchy law,
    inactive cells 0 packets. Node ``n`` uses the stream derived from
    ``(seed, "benign-volumes", n)``.

    Args:
        grid (pd.DataFrame): activity grid from :func:`resample`.
        d_benign (TruncatedCauchy): benign packet-volume law.
        seed (int): master seed of the stage.
        t_s (int, optional): timestep [s], inferred from the grid when omitted.

    Returns:
        BenignDataset: grid plus PACKET column.
    """
    frame = grid.sort_values(["NODE", "TIME"], kind="stable").reset_index(drop=True)
    packets = np.zeros(len(frame), dtype=np.float64)
    active = frame["ACTIVE"].to_numpy(dtype=bool)
    for node, rows in frame.groupby("NODE", sort=True).indices.items():
        node_active = rows[active[rows]]
        packets[node_active] = sample(d_benign, make_rng(seed, "benign-volumes", node), node_active.size)
    frame["PACKET"] = packets
    dataset = BenignDataset(frame, t_s or BenignDataset.infer_timestep(frame))
    logger.info("assigned volumes to %d of %d cells", int(active.sum()), len(frame))
    return dataset


def active_fraction_by_time_of_day(dataset: BenignDataset) -> pd.Series:
    """
    Mean fraction of active nodes at each time of day, averaged over days.

    Returns:
        pd.Series: indexed by time of day (``datetime.time``), values in [0, 1].
    """
    frame = dataset.frame
    share = frame.groupby("TIME")["ACTIVE"].mean()
    return share.groupby(share.index.time).mean().rename("ACTIVE_FRACTION")


def mean_activity_durations(grid: pd.DataFrame, t_s: int, profile: Union[DayNightProfile, None] = None) -> pd.DataFrame:
    """
    Per-node mean length of active and inactive runs, split by day and night.

    A run belongs to the period in which it starts; runs cut by the grid
    boundaries are counted as observed.

    Returns:
        pd.DataFrame: indexed by NODE with DAY_ACTIVE, DAY_INACTIVE, NIGHT_ACTIVE,
        NIGHT_INACTIVE in minutes (NaN when a node has no run of that kind).
    """
    profile = profile or DayNightProfile()
    records = []
    for node, group in grid.sort_values(["NODE", "TIME"]).groupby("NODE", sort=True):
        status = group["ACTIVE"].to_numpy(dtype=bool)
        starts = np.flatnonzero(np.r_[True, status[1:] != status[:-1]])
        lengths = np.diff(np.r_[starts, status.size]) * t_s / 60
        start_times = group["TIME"].to_numpy(dtype="datetime64[ns]")[starts]
        seconds = (start_times - start_times.astype("datetime64[D]")) / np.timedelta64(1, "s")
        day = np.array([profile.is_day(s) for s in seconds], dtype=bool)
        row = {"NODE": node}
        for period, mask_day in (("DAY", day), ("NIGHT", ~day)):
            for label, flag in (("ACTIVE", True), ("INACTIVE", False)):
                selected = lengths[mask_day & (status[starts] == flag)]
                row[f"{period}_{label}"] = float(selected.mean()) if selected.size else np.nan
        records.append(row)
    return pd.DataFrame.from_records(records).set_index("NODE")
