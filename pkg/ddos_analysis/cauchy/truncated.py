import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Sequence, Union

import numpy as np
import pandas as pd
from scipy import optimize, stats

from ddos_analysis.exceptions import DomainError, FitError, ParameterError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

FIT_MAX_EVALUATIONS = 2000
FIT_TOLERANCE = 1e-8


def check_parameters(location: float, scale: float, low: float, high: float) -> bool:
    """
    Check if the given truncated Cauchy parameters are valid.

    Args:
        location (float): location of the untruncated law [packets per timestep].
        scale (float): scale of the untruncated law [packets per timestep].
        low (float): lower truncation bound.
        high (float): upper truncation bound (maximum packet volume).

    Returns:
        bool: True if the values are valid.

    Raises:
        ParameterError: non-finite values, non-positive scale, empty support
        or a support carrying no probability mass.
    """
    values = (location, scale, low, high)
    if not all(isinstance(v, (int, float, np.floating, np.integer)) for v in values):
        raise ParameterError(f"Parameters must be real numbers, got {values}")
    if not all(math.isfinite(v) for v in values):
        raise ParameterError(f"Parameters must be finite, got {values}")
    if scale <= 0:
        raise ParameterError(f"Scale must be positive, not {scale}")
    if low >= high:
        raise ParameterError(f"Lower bound {low} must be below upper bound {high}")
    if _normalization(location, scale, low, high) <= 0:
        raise ParameterError("Truncation interval carries no probability mass")
    return True


def _normalization(location: float, scale: float, low: float, high: float) -> float:
    # difference of arctangents keeps precision far in the tails
    return float((np.arctan((high - location) / scale) - np.arctan((low - location) / scale)) / np.pi)


@dataclass(frozen=True)
class TruncatedCauchy:
    """
    Cauchy law restricted to ``[low, high]``.

    Attributes:
        location (float): location [packets per timestep].
        scale (float): scale [packets per timestep].
        low (float): lower truncation bound, 0 for packet volumes.
        high (float): maximum packet volume.
    """

    location: float
    scale: float
    low: float
    high: float

    def __post_init__(self) -> None:
        check_parameters(self.location, self.scale, self.low, self.high)

    @property
    def normalization(self) -> float:
        """
        Probability mass of the untruncated law inside ``[low, high]``.
        """
        return _normalization(self.location, self.scale, self.low, self.high)

    @property
    def base(self):
        """
        Frozen ``scipy.stats.cauchy`` with the same location and scale.
        """
        return stats.cauchy(loc=self.location, scale=self.scale)

    def to_dict(self) -> Dict[str, float]:
        return {key: float(value) for key, value in asdict(self).items()}

    @classmethod
    def from_dict(cls, record: Dict[str, float]) -> "TruncatedCauchy":
        try:
            return cls(
                location=float(record["location"]),
                scale=float(record["scale"]),
                low=float(record.get("low", 0.0)),
                high=float(record["high"]),
            )
        except KeyError as exc:
            raise ParameterError(f"Missing distribution parameter {exc}") from exc


def pdf(d: TruncatedCauchy, x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Density of the truncated law.

    Zero outside ``[low, high]``; inside, the Cauchy density divided by the
    normalization constant.

    Args:
        d (TruncatedCauchy): distribution.
        x (float, array): evaluation points [packets per timestep].

    Return:
        density (float, array): same shape as ``x``.
    """
    x_arr = np.asarray(x, dtype=np.float64)
    inside = (x_arr >= d.low) & (x_arr <= d.high)
    density = np.where(inside, d.base.pdf(x_arr) / d.normalization, 0.0)
    return float(density) if density.ndim == 0 else density


def cdf(d: TruncatedCauchy, x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Cumulative distribution function, 0 below ``low`` and 1 above ``high``.
    """
    x_arr = np.asarray(x, dtype=np.float64)
    clipped = np.clip(x_arr, d.low, d.high)
    inner = (np.arctan((clipped - d.location) / d.scale) - np.arctan((d.low - d.location) / d.scale)) / np.pi
    probability = np.clip(inner / d.normalization, 0.0, 1.0)
    probability = np.where(x_arr <= d.low, 0.0, np.where(x_arr >= d.high, 1.0, probability))
    return float(probability) if probability.ndim == 0 else probability


def ccdf(d: TruncatedCauchy, x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Complementary CDF ``1 - cdf``.
    """
    return 1.0 - cdf(d, x)


def quantile(d: TruncatedCauchy, u: ArrayLike) -> Union[float, np.ndarray]:
    """
    Inverse CDF.

    The uniform ``u`` is mapped onto ``[CauchyCDF(low), CauchyCDF(high)]`` and
    pushed through the Cauchy inverse, so no sample is ever rejected.

    Args:
        d (TruncatedCauchy): distribution.
        u (float, array): probabilities in ``[0, 1]``.

    Return:
        x (float, array): quantiles, ``low`` at 0 and ``high`` at 1.

    Raises:
        DomainError: if any ``u`` lies outside ``[0, 1]``.
    """
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(~np.isfinite(u_arr)) or np.any((u_arr < 0) | (u_arr > 1)):
        raise DomainError("Probabilities must lie in [0, 1]")
    theta_low = np.arctan((d.low - d.location) / d.scale)
    theta_high = np.arctan((d.high - d.location) / d.scale)
    theta = theta_low + u_arr * (theta_high - theta_low)
    x = np.clip(d.location + d.scale * np.tan(theta), d.low, d.high)
    x = np.where(u_arr == 0, d.low, np.where(u_arr == 1, d.high, x))
    return float(x) if x.ndim == 0 else x


def sample(d: TruncatedCauchy, rng: np.random.Generator, n: int) -> np.ndarray:
    """
    Draw ``n`` i.i.d. packet volumes by inverse-CDF sampling.

    Args:
        d (TruncatedCauchy): distribution.
        rng (numpy.random.Generator): explicit random stream.
        n (int): number of samples, ``n >= 0``.

    Return:
        numpy.ndarray: ``n`` values inside ``[low, high]``.
    """
    if n < 0:
        raise DomainError(f"Sample size must be non-negative, not {n}")
    if n == 0:
        return np.empty(0, dtype=np.float64)
    return np.asarray(quantile(d, rng.random(n)), dtype=np.float64).reshape(n)


def mean(d: TruncatedCauchy) -> float:
    """
    Closed-form mean of the truncated law.
    """
    alpha = (d.low - d.location) / d.scale
    beta = (d.high - d.location) / d.scale
    return float(d.location + d.scale * np.log((1 + beta**2) / (1 + alpha**2)) / (2 * np.pi * d.normalization))


def _fit_objective(params: np.ndarray, points: np.ndarray, empirical: np.ndarray, high: float) -> float:
    location, log_scale = params
    scale = math.exp(log_scale)
    z = _normalization(location, scale, 0.0, high)
    if not math.isfinite(scale) or z <= 0:
        return float("inf")
    model = (np.arctan((points - location) / scale) - np.arctan(-location / scale)) / (np.pi * z)
    return float(np.sum((model - empirical) ** 2))


def fit(volumes: Sequence[float]) -> TruncatedCauchy:
    """
    Fit a zero-truncated Cauchy to observed packet volumes.

    The upper bound is the maximum observed volume. Location and scale
    minimize the squared distance between the model CDF and the empirical
    CDF at the sorted sample points, found by Nelder-Mead starting from the
    median and half the interquartile range.

    Args:
        volumes (Sequence[float]): observed packet volumes of active timesteps.

    Returns:
        TruncatedCauchy: fitted distribution with ``low=0`` and ``high=max(volumes)``.

    Raises:
        FitError: empty, non-finite, negative or constant input.
    """
    values = np.sort(np.asarray(volumes, dtype=np.float64).ravel())
    if values.size == 0:
        raise FitError("Cannot fit an empty sample")
    if not np.all(np.isfinite(values)) or values[0] < 0:
        raise FitError("Packet volumes must be finite and non-negative")
    if values[0] == values[-1]:
        raise FitError(f"Cannot fit a constant sample (all values {values[0]})")

    high = float(values[-1])
    n = values.size
    empirical = (np.arange(1, n + 1) - 0.5) / n
    q1, median, q3 = np.percentile(values, [25, 50, 75])
    start_scale = (q3 - q1) / 2 or (high / 4)

    result = optimize.minimize(
        _fit_objective,
        x0=np.array([median, math.log(start_scale)]),
        args=(values, empirical, high),
        method="Nelder-Mead",
        options={"maxfev": FIT_MAX_EVALUATIONS, "fatol": FIT_TOLERANCE, "xatol": 1e-6},
    )
    location, log_scale = result.x
    logger.debug("truncated Cauchy fit: location=%.4f scale=%.4f evaluations=%d", location, math.exp(log_scale), result.nfev)
    return TruncatedCauchy(location=float(location), scale=float(math.exp(log_scale)), low=0.0, high=high)


def derive_attack(benign: TruncatedCauchy, k: float) -> TruncatedCauchy:
    """
    Attack volume law: location, scale and maximum volume multiplied by ``1 + k``.

    Args:
        benign (TruncatedCauchy): benign volume law.
        k (float): attack parameter, ``k >= 0``; ``k = 0`` camouflages the attack in benign statistics.

    Returns:
        TruncatedCauchy: attack law with ``low = 0``.
    """
    if not isinstance(k, (int, float, np.floating, np.integer)) or not math.isfinite(k):
        raise DomainError(f"k must be a finite real number, not {k!r}")
    if k < 0:
        raise DomainError(f"k must be non-negative, not {k}")
    factor = 1.0 + float(k)
    return TruncatedCauchy(
        location=factor * benign.location,
        scale=factor * benign.scale,
        low=0.0,
        high=factor * benign.high,
    )


def compare_empirical(volumes: Sequence[float], d: TruncatedCauchy, points: Union[Sequence[float], None] = None) -> pd.DataFrame:
    """
    Empirical against model PDF and CCDF, ready to plot.

    Args:
        volumes (Sequence[float]): observed packet volumes.
        d (TruncatedCauchy): fitted law.
        points (Sequence[float], optional): evaluation grid, 100 points over the support by default.

    Returns:
        pd.DataFrame: columns VOLUME, EMPIRICAL_PDF, MODEL_PDF, EMPIRICAL_CCDF, MODEL_CCDF.
    """
    values = np.sort(np.asarray(volumes, dtype=np.float64).ravel())
    if values.size == 0:
        raise FitError("Cannot compare an empty sample")
    grid = np.linspace(d.low, d.high, 100) if points is None else np.asarray(points, dtype=np.float64)
    edges = np.linspace(d.low, d.high, 101)
    hist, _ = np.histogram(values, bins=edges, density=True)
    bin_index = np.clip(np.searchsorted(edges, grid, side="right") - 1, 0, hist.size - 1)
    empirical_ccdf = 1.0 - np.searchsorted(values, grid, side="right") / values.size
    return pd.DataFrame(
        {
            "VOLUME": grid,
            "EMPIRICAL_PDF": hist[bin_index],
            "MODEL_PDF": pdf(d, grid),
            "EMPIRICAL_CCDF": empirical_ccdf,
            "MODEL_CCDF": ccdf(d, grid),
        }
    )
