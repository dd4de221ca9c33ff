"""Leave-one-out KDE outlier scores with a peaks-over-threshold tail model."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform
from scipy.stats import genpareto

from .errors import TailTooThinError
from .runtime import logger
from .settings import LookoutConfig

BANDWIDTH_FLOOR = 1e-6
DENSITY_FLOOR = 1e-300
SHAPE_BOUNDS = (-0.95, 2.0)


@dataclass(frozen=True)
class GpdFit:
    threshold: float
    exceedance_rate: float
    scale: float
    shape: float
    method: str = "mle"
    threshold_quantile: float = 0.90

    @property
    def upper_bound(self) -> float:
        """Right end of the tail support; infinite unless the shape is negative."""
        if self.shape < 0:
            return self.threshold - self.scale / self.shape
        return math.inf


@dataclass(frozen=True)
class AnomalyReport:
    time_labels: tuple[int | str, ...]
    outlier_scores: np.ndarray
    probabilities: np.ndarray
    flags: np.ndarray
    alpha: float
    bandwidth: float
    gpd: GpdFit

    @property
    def anomalies(self) -> list[int | str]:
        return [label for label, flag in zip(self.time_labels, self.flags, strict=True) if flag]


def persistence_bandwidth(points: np.ndarray, quantile: float = 0.90) -> float:
    """Quantile of the 0-dimensional death radii, read off the Euclidean MST."""
    data = np.asarray(points, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 3:
        raise ValueError(f"Need at least 3 points for the persistence bandwidth, got {data.shape[0]}.")
    distinct = np.unique(data, axis=0)
    if distinct.shape[0] < 2:
        logger.warning("All embedded points coincide; using bandwidth floor %g.", BANDWIDTH_FLOOR)
        return BANDWIDTH_FLOOR
    tree = minimum_spanning_tree(squareform(pdist(distinct)))
    lengths = tree.data[tree.data > 0]
    if lengths.size == 0:
        logger.warning("Spanning tree has no positive edges; using bandwidth floor %g.", BANDWIDTH_FLOOR)
        return BANDWIDTH_FLOOR
    return max(float(np.quantile(lengths, quantile)), BANDWIDTH_FLOOR)


def loo_kde_scores(points: np.ndarray, h: float) -> np.ndarray:
    data = np.asarray(points, dtype=np.float64)
    count, dim = data.shape
    if count < 2:
        raise ValueError("Need at least 2 points for leave-one-out density estimates.")
    if h <= 0:
        raise ValueError(f"Invalid bandwidth {h}. Must be positive.")
    squared = squareform(pdist(data, "sqeuclidean"))
    kernel = np.exp(-squared / (2.0 * h * h)) / (2.0 * np.pi * h * h) ** (dim / 2.0)
    np.fill_diagonal(kernel, 0.0)
    density = kernel.sum(axis=1) / (count - 1)
    return -np.log(density + DENSITY_FLOOR)


def _profile_sigma(excess: np.ndarray, shape: float) -> tuple[float, float]:
    """Scale maximizing the likelihood at a fixed shape, and the negative log-likelihood there."""
    top = float(excess.max())
    mean = max(float(excess.mean()), 1e-12)
    lower = math.log(mean) - 10.0
    if shape < 0:
        # support requires sigma > -shape * max(excess)
        lower = max(lower, math.log(-shape * top) + 1e-9)
    upper = max(math.log(mean) + 10.0, lower + 1.0)

    def objective(log_sigma: float) -> float:
        value = -float(np.sum(genpareto.logpdf(excess, c=shape, scale=math.exp(log_sigma))))
        return value if math.isfinite(value) else 1e300

    result = minimize_scalar(objective, bounds=(lower, upper), method="bounded", options={"xatol": 1e-10})
    return math.exp(float(result.x)), float(result.fun)


def _fit_mle(excess: np.ndarray) -> tuple[float, float] | None:
    grid = np.linspace(*SHAPE_BOUNDS, 59)
    with np.errstate(all="ignore"):
        profile = [_profile_sigma(excess, float(shape))[1] for shape in grid]
    start = int(np.argmin(profile))
    lo = float(grid[max(start - 1, 0)])
    hi = float(grid[min(start + 1, grid.size - 1)])

    def objective(shape: float) -> float:
        return _profile_sigma(excess, shape)[1]

    with np.errstate(all="ignore"):
        result = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
        shape = float(result.x)
        scale, nll = _profile_sigma(excess, shape)
    if not (math.isfinite(nll) and nll < 1e299 and scale > 0):
        return None
    return scale, shape


def _fit_pwm(excess: np.ndarray) -> tuple[float, float]:
    ordered = np.sort(excess)
    count = ordered.size
    a0 = float(ordered.mean())
    weights = (count - np.arange(1, count + 1)) / (count - 1)
    a1 = float(np.mean(weights * ordered))
    denominator = a0 - 2.0 * a1
    if abs(denominator) < 1e-12:
        return max(a0, 1e-12), 0.0
    k = a0 / denominator - 2.0
    scale = 2.0 * a0 * a1 / denominator
    shape = float(np.clip(-k, *SHAPE_BOUNDS))
    return max(scale, 1e-12), shape


def fit_gpd(scores: np.ndarray, threshold_quantile: float = 0.90, *, min_exceedances: int = 5) -> GpdFit:
    """Fit a generalized Pareto tail to the scores above their ``threshold_quantile``."""
    values = np.asarray(scores, dtype=np.float64)
    threshold = float(np.quantile(values, threshold_quantile))
    excess = values[values > threshold] - threshold
    if excess.size < min_exceedances:
        raise TailTooThinError(
            f"tail too thin; lower threshold_quantile ({excess.size} exceedances above "
            f"quantile {threshold_quantile}, need {min_exceedances})."
        )
    rate = excess.size / values.size
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fitted = _fit_mle(excess)
    method = "mle"
    if fitted is None:
        logger.warning("GPD maximum likelihood failed; using probability-weighted moments.")
        fitted = _fit_pwm(excess)
        method = "pwm"
    scale, shape = fitted
    if shape < 0 and threshold - scale / shape <= threshold + float(excess.max()):
        scale = -shape * float(excess.max()) * (1 + 1e-9)
    return GpdFit(
        threshold=threshold,
        exceedance_rate=rate,
        scale=scale,
        shape=shape,
        method=method,
        threshold_quantile=threshold_quantile,
    )


def tail_probabilities(scores: np.ndarray, fit: GpdFit) -> np.ndarray:
    values = np.asarray(scores, dtype=np.float64)
    ordered = np.sort(values)
    # count of scores strictly greater than each value
    survival = (values.size - np.searchsorted(ordered, values, side="right")) / values.size
    probabilities = np.maximum(survival, fit.exceedance_rate)
    above = values > fit.threshold
    if np.any(above):
        tail = fit.exceedance_rate * genpareto.sf(values[above] - fit.threshold, c=fit.shape, scale=fit.scale)
        probabilities[above] = np.clip(np.nan_to_num(tail, nan=0.0), 0.0, fit.exceedance_rate)
    return np.clip(probabilities, 0.0, 1.0)


def flag_anomalies(probabilities: np.ndarray, alpha: float = 0.05) -> np.ndarray:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"Invalid value for alpha: {alpha}. Expected range is (0, 1).")
    return np.asarray(probabilities, dtype=np.float64) < alpha


def lookout(
    points: np.ndarray,
    alpha: float = 0.05,
    config: LookoutConfig | None = None,
    *,
    time_labels: tuple[int | str, ...] | None = None,
) -> AnomalyReport:
    """Score embedded points and flag those whose tail probability falls below ``alpha``."""
    config = config or LookoutConfig()
    data = np.asarray(points, dtype=np.float64)
    bandwidth = persistence_bandwidth(data, config.bandwidth_quantile)
    scores = loo_kde_scores(data, bandwidth)
    quantile = config.threshold_quantile
    try:
        fit = fit_gpd(scores, quantile, min_exceedances=config.min_exceedances)
    except TailTooThinError:
        lowered = 1.0 - config.min_exceedances / scores.size
        if not config.auto_lower_threshold or lowered <= 0.0 or lowered >= quantile:
            raise
        logger.warning(
            "Only a thin tail above quantile %.3f for T=%d; lowering the threshold quantile to %.3f.",
            quantile,
            scores.size,
            lowered,
        )
        fit = fit_gpd(scores, lowered, min_exceedances=config.min_exceedances)
    probabilities = tail_probabilities(scores, fit)
    flags = flag_anomalies(probabilities, alpha)
    logger.info(
        "Lookout: bandwidth=%.4g threshold=%.4g rate=%.3f scale=%.4g shape=%.4g flagged=%d",
        bandwidth,
        fit.threshold,
        fit.exceedance_rate,
        fit.scale,
        fit.shape,
        int(flags.sum()),
    )
    return AnomalyReport(
        time_labels=time_labels if time_labels is not None else tuple(range(1, data.shape[0] + 1)),
        outlier_scores=scores,
        probabilities=probabilities,
        flags=flags,
        alpha=alpha,
        bandwidth=bandwidth,
        gpd=fit,
    )


def with_alpha(report: AnomalyReport, alpha: float) -> AnomalyReport:
    """Re-threshold a report at a different level without refitting."""
    return replace(report, alpha=alpha, flags=flag_anomalies(report.probabilities, alpha))
