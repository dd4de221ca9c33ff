"""Trimmed scaling of residuals and projection-pursuit robust PCA."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from statsmodels.robust.scale import mad, qn_scale

from .errors import NoVariationError
from .residuals import ResidualMatrix
from .runtime import logger
from .settings import EmbedConfig

SCALE_FLOOR = 1e-12
_REFINE_ANGLES = 31


@dataclass(frozen=True)
class ScaledResidualMatrix:
    values: np.ndarray
    centers: np.ndarray
    scales: np.ndarray
    flagged: tuple[str, ...]
    feature_names: tuple[str, ...]
    time_labels: tuple[int | str, ...]

    @property
    def length(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class EmbeddedPoints:
    scores: np.ndarray
    directions: np.ndarray
    center: np.ndarray
    spreads: tuple[float, ...]
    time_labels: tuple[int | str, ...] = ()


def _trimmed_moments(column: np.ndarray, lower: float, upper: float) -> tuple[float, float]:
    lo, hi = np.quantile(column, [lower, upper])
    kept = column[(column >= lo) & (column <= hi)]
    if kept.size < 2:
        return float(kept.mean()) if kept.size else 0.0, 0.0
    return float(kept.mean()), float(kept.std(ddof=1))


def trimmed_scale(
    rm: ResidualMatrix,
    config: EmbedConfig | None = None,
    *,
    min_length: int = 8,
) -> ScaledResidualMatrix:
    """Standardize each column by the mean and sd of its values inside the trimming quantiles.

    Values outside the quantiles do not enter the statistics but are still scaled.
    """
    config = config or EmbedConfig()
    values = np.asarray(rm.values, dtype=np.float64)
    if values.shape[0] < min_length:
        raise ValueError(
            f"sequence too short for time-series modelling: T={values.shape[0]}, need at least {min_length}."
        )

    scaled = np.zeros_like(values)
    centers = np.zeros(values.shape[1])
    scales = np.zeros(values.shape[1])
    flagged: list[str] = []
    for index, name in enumerate(rm.feature_names):
        center, spread = _trimmed_moments(values[:, index], config.trim_lower, config.trim_upper)
        centers[index], scales[index] = center, spread
        if spread < SCALE_FLOOR:
            flagged.append(name)
            continue
        scaled[:, index] = (values[:, index] - center) / spread
    if flagged:
        logger.warning("Zero trimmed spread for %s; columns zero-filled.", ", ".join(flagged))
    return ScaledResidualMatrix(
        values=scaled,
        centers=centers,
        scales=scales,
        flagged=tuple(flagged),
        feature_names=rm.feature_names,
        time_labels=rm.time_labels,
    )


def _robust_spread(projected: np.ndarray, method: str) -> np.ndarray:
    """Robust scale of each column of ``projected``."""
    if method == "qn":
        return np.apply_along_axis(qn_scale, 0, projected)
    return np.asarray(mad(projected, axis=0, center=np.median), dtype=np.float64)


def _spread(projected: np.ndarray, method: str) -> np.ndarray:
    robust = _robust_spread(projected, method)
    if np.all(robust <= SCALE_FLOOR):
        # more than half the points coincide in every candidate direction
        return projected.std(axis=0)
    return robust


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1)
    keep = norms > SCALE_FLOOR
    return matrix[keep] / norms[keep, None]


def _refine(data: np.ndarray, best: np.ndarray, best_value: float, config: EmbedConfig) -> tuple[np.ndarray, float]:
    dim = data.shape[1]
    angles = np.linspace(-1.0, 1.0, _REFINE_ANGLES)
    arc = np.pi / 4
    for _ in range(config.refine_rounds):
        for axis in range(dim):
            tangent = -best[axis] * best
            tangent[axis] += 1.0
            norm = np.linalg.norm(tangent)
            if norm < 1e-10:
                continue
            tangent /= norm
            thetas = angles * arc
            candidates = np.cos(thetas)[:, None] * best + np.sin(thetas)[:, None] * tangent
            values = _spread(data @ candidates.T, config.scale)
            winner = int(np.argmax(values))
            if values[winner] > best_value:
                best = candidates[winner] / np.linalg.norm(candidates[winner])
                best_value = float(values[winner])
        arc /= 10.0
    return best, best_value


def _search_direction(data: np.ndarray, rng: np.random.Generator, config: EmbedConfig) -> tuple[np.ndarray, float]:
    dim = data.shape[1]
    if dim == 1:
        unit = np.ones(1)
        return unit, float(_spread(data, config.scale)[0])
    candidates = [_normalize_rows(data)]
    if config.n_random_directions:
        candidates.append(_normalize_rows(rng.standard_normal((config.n_random_directions, dim))))
    candidates.append(np.eye(dim))
    pool = np.vstack(candidates)
    values = _spread(data @ pool.T, config.scale)
    winner = int(np.argmax(values))
    return _refine(data, pool[winner].copy(), float(values[winner]), config)


def _orient(direction: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(direction)))
    return -direction if direction[pivot] < 0 else direction


def robust_pca(srm: ScaledResidualMatrix, k: int = 2, config: EmbedConfig | None = None) -> EmbeddedPoints:
    """Project onto ``k`` directions found one at a time by maximizing a robust scale."""
    config = config or EmbedConfig(k=k)
    values = np.asarray(srm.values, dtype=np.float64)
    rows, n = values.shape
    if k > n:
        raise ValueError(f"Cannot extract {k} directions from {n} feature columns.")
    if rows < k + 2:
        raise ValueError(f"Need at least {k + 2} time points for {k} directions, got {rows}.")
    if not np.any(values):
        raise NoVariationError("no variation: every scaled residual is zero.")

    center = np.median(values, axis=0)
    centered = values - center
    rng = np.random.default_rng(config.seed)

    found: list[np.ndarray] = []
    spreads: list[float] = []
    basis = np.eye(n)
    for _ in range(k):
        local, value = _search_direction(centered @ basis, rng, config)
        direction = basis @ local
        for previous in found:
            direction -= (direction @ previous) * previous
        direction /= np.linalg.norm(direction)
        found.append(_orient(direction))
        spreads.append(value)
        basis = null_space(np.vstack(found))
        if basis.shape[1] == 0:
            break

    order = np.argsort(-np.asarray(spreads), kind="stable")
    directions = np.vstack([found[i] for i in order])
    ranked = tuple(float(spreads[i]) for i in order)
    logger.info("Robust PCA spreads: %s", ", ".join(f"{value:.4g}" for value in ranked))
    return EmbeddedPoints(
        scores=centered @ directions.T,
        directions=directions,
        center=center,
        spreads=ranked,
        time_labels=srm.time_labels,
    )
