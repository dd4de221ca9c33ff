"""End-to-end detection: features, ARIMA residuals, robust projection, lookout."""

from __future__ import annotations

from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embed import EmbeddedPoints, ScaledResidualMatrix, robust_pca, trimmed_scale
from .errors import PipelineError
from .features import FeatureMatrix, compute_feature_matrix, read_feature_matrix
from .graphs import TemporalNetworkSequence, load_sequence
from .lookout import AnomalyReport, lookout
from .residuals import ResidualMatrix, residualize_matrix
from .runtime import logger
from .settings import PipelineConfig

# Usage checks run before any stage, so a ValueError raised inside one is a numeric failure.
_NUMERIC_FAILURES = (ValueError, np.linalg.LinAlgError, ArithmeticError)


@dataclass(frozen=True)
class DetectionResult:
    features: FeatureMatrix
    residuals: ResidualMatrix
    scaled: ScaledResidualMatrix
    embedding: EmbeddedPoints
    report: AnomalyReport


@contextmanager
def _stage(name: str) -> Iterator[None]:
    logger.debug("Stage %s started", name)
    try:
        yield
    except _NUMERIC_FAILURES as exc:
        raise PipelineError(name, str(exc)) from exc
    logger.debug("Stage %s finished", name)


def _require_length(length: int, config: PipelineConfig) -> None:
    minimum = config.arima.min_length
    if length < minimum:
        raise ValueError(f"sequence too short for time-series modelling: T={length}, need at least {minimum}.")


def detect_from_features(fm: FeatureMatrix, config: PipelineConfig | None = None) -> DetectionResult:
    """Run the modelling stages on an already computed feature matrix."""
    config = config or PipelineConfig()
    _require_length(fm.length, config)
    if config.embed.k > len(fm.feature_names):
        raise ValueError(f"Cannot extract {config.embed.k} directions from {len(fm.feature_names)} feature columns.")
    with _stage("arima"):
        residual_matrix = residualize_matrix(fm, config.arima, workers=config.threads)
    with _stage("scale"):
        scaled = trimmed_scale(residual_matrix, config.embed, min_length=config.arima.min_length)
    with _stage("embed"):
        embedding = robust_pca(scaled, config.embed.k, config.embed)
    with _stage("lookout"):
        report = lookout(embedding.scores, config.alpha, config.lookout, time_labels=fm.time_labels)
    logger.info("Flagged %d of %d time points at alpha=%g", int(report.flags.sum()), fm.length, config.alpha)
    return DetectionResult(
        features=fm,
        residuals=residual_matrix,
        scaled=scaled,
        embedding=embedding,
        report=report,
    )


def detect(sequence: TemporalNetworkSequence, config: PipelineConfig | None = None) -> DetectionResult:
    config = config or PipelineConfig()
    _require_length(len(sequence), config)
    with _stage("features"):
        fm = compute_feature_matrix(sequence, config.features, workers=config.threads)
    return detect_from_features(fm, config)


def detect_input(
    config: PipelineConfig,
    *,
    from_features: Path | None = None,
    node_list: Path | None = None,
) -> DetectionResult:
    """Load the configured input (or a saved feature CSV) and run detection on it."""
    if from_features is not None:
        return detect_from_features(read_feature_matrix(from_features), config)
    if config.input.path is None:
        raise ValueError("No input given. Pass --input or set 'input' in the config file.")
    sequence = load_sequence(
        config.input.path,
        fmt="dir" if config.input.path.is_dir() else config.input.format,
        nodes=config.input.nodes,
        directed=config.input.directed,
        node_list=node_list,
    )
    return detect(sequence, config)
