from __future__ import annotations

from .detection_ops import _list_feature_names_sync
from .runtime import mcp
from .settings import SETTINGS
from .tools import (
    compute_features,
    detect_anomalies,
    list_feature_names,
    main,
    run_named_experiment,
    simulate_sequence,
)

__all__ = [
    "SETTINGS",
    "_list_feature_names_sync",
    "compute_features",
    "detect_anomalies",
    "list_feature_names",
    "main",
    "mcp",
    "run_named_experiment",
    "simulate_sequence",
]


if __name__ == "__main__":
    main()
