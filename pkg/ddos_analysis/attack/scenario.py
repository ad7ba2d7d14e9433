import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Union

import pandas as pd

from ddos_analysis.exceptions import ConfigurationError, ScenarioError
from ddos_analysis.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def check_attack_properties(duration: float, node_ratio: float, k: float) -> bool:
    """
    Check the duration, node ratio and packet-volume parameter of an attack.

    Raises:
        ScenarioError: non-positive duration, ratio outside (0, 1] or negative ``k``.
    """
    if not duration > 0:
        raise ScenarioError(f"Attack duration must be positive, not {duration}")
    if not 0 < node_ratio <= 1:
        raise ScenarioError(f"Node ratio must lie in (0, 1], not {node_ratio}")
    if not (math.isfinite(k) and k >= 0):
        raise ScenarioError(f"k must be non-negative, not {k}")
    return True


def _format_number(value: float) -> str:
    return f"{value:g}"


@dataclass(frozen=True)
class AttackScenario:
    """
    One synthetic DDoS attack window.

    Attributes:
        start (pd.Timestamp): attack start time (a_s).
        duration (int): attack duration [s] (a_d).
        node_ratio (float): fraction of nodes under attack (a_r).
        k (float): packet-volume parameter of the attack law.
        seed (int): seed of the node selection and attack volumes.
    """

    start: pd.Timestamp
    duration: int
    node_ratio: float
    k: float
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", pd.Timestamp(self.start))
        check_attack_properties(self.duration, self.node_ratio, self.k)

    @property
    def end(self) -> pd.Timestamp:
        """
        Exclusive end of the window.
        """
        return self.start + pd.Timedelta(seconds=self.duration)

    @property
    def name(self) -> str:
        return (
            f"attack_as{self.start:%Y%m%dT%H%M%S}_ad{int(self.duration)}"
            f"_ar{_format_number(self.node_ratio)}_k{_format_number(self.k)}"
        )

    def attacked_count(self, n_nodes: int) -> int:
        """
        Number of attacked nodes, rounding fractional counts up.
        """
        # rounding first keeps 0.3 * 10 at 3
        return max(1, math.ceil(round(self.node_ratio * n_nodes, 9)))

    def to_dict(self) -> dict:
        return {
            "start": self.start.isoformat(),
            "duration": int(self.duration),
            "node_ratio": float(self.node_ratio),
            "k": float(self.k),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "AttackScenario":
        return cls(
            start=pd.Timestamp(record["start"]),
            duration=int(record["duration"]),
            node_ratio=float(record["node_ratio"]),
            k=float(record["k"]),
            seed=int(record.get("seed", 0)),
        )


@dataclass(frozen=True)
class AttackCombination:
    """
    Attack properties with the start given as a time of day.

    A combination is repeated on every day of a dataset; it is the unit over
    which metrics are reported and aggregated.

    Attributes:
        start_time (str): start time of day, ``"HH:MM"``.
        duration (int): attack duration [s].
        node_ratio (float): fraction of nodes under attack.
        k (float): packet-volume parameter.
    """

    start_time: str
    duration: int
    node_ratio: float
    k: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_time", _normalize_time_of_day(self.start_time))
        check_attack_properties(self.duration, self.node_ratio, self.k)

    @property
    def offset(self) -> pd.Timedelta:
        return pd.Timedelta(self.start_time + ":00")

    @property
    def name(self) -> str:
        return (
            f"attack_as{self.start_time.replace(':', '')}_ad{int(self.duration)}"
            f"_ar{_format_number(self.node_ratio)}_k{_format_number(self.k)}"
        )

    def to_dict(self) -> dict:
        return {
            "start_time": self.start_time,
            "duration": int(self.duration),
            "node_ratio": float(self.node_ratio),
            "k": float(self.k),
        }


def _normalize_time_of_day(value: Union[str, pd.Timedelta]) -> str:
    try:
        offset = value if isinstance(value, pd.Timedelta) else pd.Timedelta(f"{value}:00" if str(value).count(":") == 1 else value)
    except ValueError as exc:
        raise ScenarioError(f"Invalid start time of day {value!r}") from exc
    if not pd.Timedelta(0) <= offset < pd.Timedelta(days=1):
        raise ScenarioError(f"Start time of day {value!r} is outside 00:00-24:00")
    minutes = int(offset.total_seconds() // 60)
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def _unique(values: Iterable, label: str) -> list:
    values = list(values)
    if not values:
        raise ConfigurationError(f"Attack grid needs at least one {label}")
    return list(dict.fromkeys(values))


def scenario_grid(
    starts: Sequence[pd.Timestamp],
    durations: Sequence[int],
    ratios: Sequence[float],
    ks: Sequence[float],
    seed: int = 0,
) -> List[AttackScenario]:
    """
    Cartesian product of attack properties.

    Duplicates are dropped before the product and the order follows the
    input lists lexicographically (starts vary slowest). Each scenario gets a
    seed derived from ``seed`` and its own name.

    Raises:
        ConfigurationError: any list is empty.
    """
    product = itertools.product(
        _unique((pd.Timestamp(s) for s in starts), "start"),
        _unique(durations, "duration"),
        _unique(ratios, "ratio"),
        _unique(ks, "k"),
    )
    scenarios = []
    for start, duration, ratio, k in product:
        draft = AttackScenario(start=start, duration=int(duration), node_ratio=float(ratio), k=float(k))
        scenarios.append(AttackScenario(draft.start, draft.duration, draft.node_ratio, draft.k, derive_seed(seed, "scenario", draft.name)))
    logger.debug("scenario grid with %d scenarios", len(scenarios))
    return scenarios


def combination_grid(
    start_times: Sequence[str],
    durations: Sequence[int],
    ratios: Sequence[float],
    ks: Sequence[float],
) -> List[AttackCombination]:
    """
    Cartesian product of daily attack properties, deduplicated, in input order.
    """
    product = itertools.product(
        _unique((_normalize_time_of_day(s) for s in start_times), "start"),
        _unique(durations, "duration"),
        _unique(ratios, "ratio"),
        _unique(ks, "k"),
    )
    return [AttackCombination(start, int(duration), float(ratio), float(k)) for start, duration, ratio, k in product]


def daily_scenarios(
    combination: AttackCombination,
    begin: pd.Timestamp,
    end: pd.Timestamp,
    seed: int = 0,
) -> List[AttackScenario]:
    """
    One attack window per day of ``[begin, end)`` for a combination.

    Windows that would run past ``end`` are skipped. Each day's window owns a
    seed derived from ``seed``, the combination and the day.
    """
    begin, end = pd.Timestamp(begin), pd.Timestamp(end)
    scenarios = []
    day = begin.normalize()
    while day < end:
        start = day + combination.offset
        if start >= begin and start + pd.Timedelta(seconds=combination.duration) <= end:
            scenarios.append(
                AttackScenario(
                    start=start,
                    duration=combination.duration,
                    node_ratio=combination.node_ratio,
                    k=combination.k,
                    seed=derive_seed(seed, "scenario", combination.name, day.date().isoformat()),
                )
            )
        day += pd.Timedelta(days=1)
    if not scenarios:
        logger.warning("no %s window fits between %s and %s", combination.name, begin, end)
    return scenarios
