from ddos_analysis.ingest.benign import (
    active_fraction_by_time_of_day,
    assign_volumes,
    events_from_grid,
    mean_activity_durations,
    resample,
    timestep_grid,
)
from ddos_analysis.ingest.dataset import BENIGN_COLUMNS, BenignDataset, Dataset
from ddos_analysis.ingest.events import (
    EVENT_COLUMNS,
    DayNightProfile,
    EventRecord,
    events_frame,
    read_events_csv,
    synth_events,
    validate_events,
    write_events_csv,
)

__all__ = [
    "BENIGN_COLUMNS",
    "EVENT_COLUMNS",
    "BenignDataset",
    "Dataset",
    "DayNightProfile",
    "EventRecord",
    "active_fraction_by_time_of_day",
    "assign_volumes",
    "events_frame",
    "events_from_grid",
    "mean_activity_durations",
    "read_events_csv",
    "resample",
    "synth_events",
    "timestep_grid",
    "validate_events",
    "write_events_csv",
]
