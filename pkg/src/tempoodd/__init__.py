"""Anomaly detection for temporal network sequences."""

from .pipeline import DetectionResult, detect, detect_from_features
from .settings import FEATURE_NAMES, PipelineConfig

__all__ = ["FEATURE_NAMES", "DetectionResult", "PipelineConfig", "detect", "detect_from_features"]
