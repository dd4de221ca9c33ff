from __future__ import annotations


class GraphFormatError(ValueError):
    """An input row or edge could not be turned into a graph."""


class TailTooThinError(ValueError):
    """Too few scores above the POT threshold to fit a tail model."""


class NoVariationError(ValueError):
    """The matrix handed to the projection has no spread in any direction."""


class FeatureDropped(Exception):  # noqa: N818
    """Signal raised by imputation when a feature column has no observed value."""

    def __init__(self, feature: str) -> None:
        super().__init__(f"Feature {feature!r} has no observed values and was dropped.")
        self.feature = feature


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str) -> None:
        super().__init__(message)
        self.stage = stage


def _format_error(action: str, exc: Exception) -> str:
    if isinstance(exc, PermissionError):
        return f"Permission denied during {action}: {exc}"
    if isinstance(exc, (ValueError, TypeError, OSError)):
        return str(exc)
    if isinstance(exc, PipelineError):
        return f"Pipeline failed at stage {exc.stage} during {action}: {exc}"
    return f"Unexpected error during {action}: {type(exc).__name__}: {exc}"


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (ValueError, TypeError, OSError)):
        return 2
    return 1
