from __future__ import annotations

from functools import partial
from pathlib import Path
from typing import cast

import anyio

from .detection_ops import (
    _compute_features_sync,
    _detect_anomalies_sync,
    _list_feature_names_sync,
    _run_named_experiment_sync,
    _simulate_sequence_sync,
)
from .errors import _format_error
from .generators import AnomalyMode
from .models import DetectionSummary, ExperimentSummary, FeatureNames, FeatureTable, SimulationSummary
from .runtime import logger, mcp
from .settings import SETTINGS, PipelineConfig


def _config(**flags: object) -> PipelineConfig:
    return PipelineConfig.from_mapping({key: value for key, value in flags.items() if value is not None})


@mcp.tool(structured_output=True)
async def detect_anomalies(
    input_path: str | None = None,
    from_features: str | None = None,
    input_format: str = "long",
    nodes: str = "observed",
    directed: bool = False,
    alpha: float = 0.05,
    seed: int | None = None,
    features: list[str] | None = None,
    out_dir: str | None = None,
    node_list: str | None = None,
) -> DetectionSummary:
    """Run feature extraction, ARIMA residuals, robust PCA and lookout on a sequence and flag anomalies."""
    try:
        config = _config(
            input=input_path,
            format=input_format,
            nodes=nodes,
            directed=directed,
            alpha=alpha,
            seed=seed,
            features=features,
            out=out_dir,
        )
        return cast(
            DetectionSummary,
            await anyio.to_thread.run_sync(
                _detect_anomalies_sync,
                config,
                Path(from_features) if from_features else None,
                Path(node_list) if node_list else None,
            ),
        )
    except Exception as exc:
        raise RuntimeError(_format_error("detect_anomalies", exc)) from None


@mcp.tool(structured_output=True)
async def compute_features(
    input_path: str,
    input_format: str = "long",
    nodes: str = "observed",
    directed: bool = False,
    features: list[str] | None = None,
    out_path: str | None = None,
    node_list: str | None = None,
) -> FeatureTable:
    """Compute the per-snapshot feature matrix; undefined values are returned as null."""
    try:
        config = _config(input=input_path, format=input_format, nodes=nodes, directed=directed, features=features)
        return cast(
            FeatureTable,
            await anyio.to_thread.run_sync(
                partial(
                    _compute_features_sync,
                    config,
                    node_list=Path(node_list) if node_list else None,
                    out=Path(out_path) if out_path else None,
                ),
            ),
        )
    except Exception as exc:
        raise RuntimeError(_format_error("compute_features", exc)) from None


@mcp.tool(structured_output=True)
async def simulate_sequence(
    out_dir: str,
    model: str = "er",
    experiment: str | None = None,
    p_star: float | None = None,
    anomaly_mode: AnomalyMode | None = None,
    seed: int | None = None,
    length: int | None = None,
    anomaly_time: int | None = None,
) -> SimulationSummary:
    """Write a synthetic sequence with one planted anomaly as edges.csv, nodes.csv and manifest.json."""
    try:
        return cast(
            SimulationSummary,
            await anyio.to_thread.run_sync(
                partial(
                    _simulate_sequence_sync,
                    Path(out_dir),
                    model=model,
                    experiment=experiment,
                    p_star=p_star,
                    anomaly_mode=anomaly_mode,
                    seed=seed,
                    overrides={"length": length, "anomaly_time": anomaly_time},
                )
            ),
        )
    except Exception as exc:
        raise RuntimeError(_format_error("simulate_sequence", exc)) from None


@mcp.tool(structured_output=True)
async def run_named_experiment(
    name: str,
    replications: int | None = None,
    seed: int | None = None,
    anomaly_mode: AnomalyMode | None = None,
    p_stars: list[float] | None = None,
    out_dir: str | None = None,
) -> ExperimentSummary:
    """Run exp1..exp4 and return one AUC per replication and p* value."""
    try:
        return cast(
            ExperimentSummary,
            await anyio.to_thread.run_sync(
                partial(
                    _run_named_experiment_sync,
                    name,
                    out=Path(out_dir) if out_dir else None,
                    replications=replications,
                    seed=seed,
                    anomaly_mode=anomaly_mode,
                    p_stars=tuple(p_stars) if p_stars else None,
                )
            ),
        )
    except Exception as exc:
        raise RuntimeError(_format_error("run_named_experiment", exc)) from None


@mcp.tool(structured_output=True)
async def list_feature_names() -> FeatureNames:
    """List the graph features in column order."""
    try:
        return _list_feature_names_sync()
    except Exception as exc:
        raise RuntimeError(_format_error("list_feature_names", exc)) from None


def main() -> None:
    logger.info("Starting tempoodd tool server with transport=%s", SETTINGS.mcp_transport)
    mcp.run(transport=SETTINGS.mcp_transport)
