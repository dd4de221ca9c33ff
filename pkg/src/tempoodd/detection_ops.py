from __future__ import annotations

from dataclasses import fields, replace
from pathlib import Path
from typing import Any, cast

import numpy as np

from .experiments import get_preset, run_named_experiment
from .features import compute_feature_matrix, write_feature_matrix
from .generators import (
    AnomalyMode,
    GeneratorSpec,
    ModelName,
    gen_density_spike_sequence,
    gen_growing_edges_sequence,
    gen_star_sequence,
    generate_sequence,
)
from .graphs import TemporalNetworkSequence, load_sequence
from .models import (
    DetectionSummary,
    ExperimentRow,
    ExperimentSummary,
    FeatureNames,
    FeatureTable,
    SimulationSummary,
)
from .pipeline import detect_input
from .reports import report_payload, write_detection_outputs, write_experiment_outputs, write_simulation
from .runtime import logger
from .settings import FEATURE_NAMES, SETTINGS, PipelineConfig

TOY_MODELS = ("density-spike", "star", "growing-drop")
_MODEL_ALIASES: dict[str, ModelName] = {
    "er": "erdos_renyi",
    "erdos_renyi": "erdos_renyi",
    "ba": "barabasi_albert",
    "barabasi_albert": "barabasi_albert",
    "ws": "watts_strogatz",
    "watts_strogatz": "watts_strogatz",
}


def _detect_anomalies_sync(
    config: PipelineConfig,
    from_features: Path | None = None,
    node_list: Path | None = None,
) -> DetectionSummary:
    result = detect_input(config, from_features=from_features, node_list=node_list)
    written: list[str] = []
    if config.out is not None:
        written = [str(path) for path in write_detection_outputs(result, config.out)]
    payload = report_payload(result)
    payload["written"] = written
    return cast(DetectionSummary, payload)


def _compute_features_sync(
    config: PipelineConfig,
    node_list: Path | None = None,
    out: Path | None = None,
) -> FeatureTable:
    if config.input.path is None:
        raise ValueError("No input given. Pass --input or set 'input' in the config file.")
    sequence = load_sequence(
        config.input.path,
        fmt="dir" if config.input.path.is_dir() else config.input.format,
        nodes=config.input.nodes,
        directed=config.input.directed,
        node_list=node_list,
    )
    fm = compute_feature_matrix(sequence, config.features, workers=config.threads)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_feature_matrix(fm, out)
    frame = fm.to_frame()
    rows = [
        {name: (None if np.isnan(value) else float(value)) for name, value in record.items() if name != "t"}
        for record in frame.to_dict(orient="records")
    ]
    return FeatureTable(
        feature_names=list(fm.feature_names),
        time_labels=list(fm.time_labels),
        rows=rows,
        written=str(out) if out is not None else None,
    )


def _build_spec(
    model: str,
    *,
    experiment: str | None,
    p_star: float | None,
    anomaly_mode: AnomalyMode | None,
    seed: int,
    overrides: dict[str, Any],
) -> GeneratorSpec:
    if experiment is not None:
        preset = get_preset(experiment)
        spec = preset.specs(
            seed=seed,
            anomaly_mode=anomaly_mode,
            p_stars=(p_star,) if p_star is not None else preset.p_stars[-1:],
        )[0]
    else:
        if model not in _MODEL_ALIASES:
            valid = ", ".join([*_MODEL_ALIASES, *TOY_MODELS])
            raise ValueError(f"Unknown model {model!r}. Valid models: {valid}.")
        values: dict[str, Any] = {"model": _MODEL_ALIASES[model], "seed": seed}
        if p_star is not None:
            values["anomaly_offset"] = p_star
        if anomaly_mode is not None:
            values["anomaly_mode"] = anomaly_mode
        spec = GeneratorSpec(**values)
    clean = {key: value for key, value in overrides.items() if value is not None}
    unknown = sorted(set(clean) - {item.name for item in fields(GeneratorSpec)})
    if unknown:
        raise ValueError(f"Unknown generator options: {', '.join(unknown)}.")
    return replace(spec, **clean) if clean else spec


def _toy_sequence(model: str, seed: int, length: int | None, anomaly_time: int | None) -> TemporalNetworkSequence:
    rng = np.random.default_rng(seed)
    if model == "density-spike":
        return gen_density_spike_sequence(T=length or 20, anomaly_time=anomaly_time, rng=rng)
    if model == "star":
        return gen_star_sequence(T=length or 20, anomaly_time=anomaly_time, rng=rng)
    return gen_growing_edges_sequence(T=length or 100, drop_time=anomaly_time or 60, rng=rng)


def _simulate_sequence_sync(
    out: Path,
    model: str = "er",
    experiment: str | None = None,
    p_star: float | None = None,
    anomaly_mode: AnomalyMode | None = None,
    seed: int | None = None,
    overrides: dict[str, Any] | None = None,
) -> SimulationSummary:
    resolved_seed = SETTINGS.default_seed if seed is None else seed
    extra = dict(overrides or {})
    if experiment is None and model in TOY_MODELS:
        length, anomaly_time = extra.get("length"), extra.get("anomaly_time")
        sequence = _toy_sequence(model, resolved_seed, length, anomaly_time)
        default_time = 60 if model == "growing-drop" else len(sequence)
        manifest: dict[str, Any] = {
            "model": model,
            "seed": resolved_seed,
            "length": len(sequence),
            "anomaly_time": anomaly_time or default_time,
        }
    else:
        spec = _build_spec(
            model,
            experiment=experiment,
            p_star=p_star,
            anomaly_mode=anomaly_mode,
            seed=resolved_seed,
            overrides=extra,
        )
        sequence = generate_sequence(spec)
        manifest = spec.manifest()
        if experiment is not None:
            manifest["experiment"] = experiment
    written = write_simulation(sequence, manifest, out)
    logger.info("Simulated %d snapshots (%s) into %s", len(sequence), manifest["model"], out)
    return SimulationSummary(
        model=str(manifest["model"]),
        snapshots=len(sequence),
        anomaly_time=manifest.get("anomaly_time"),
        seed=resolved_seed,
        written=[str(path) for path in written],
    )


def _run_named_experiment_sync(
    name: str,
    out: Path | None = None,
    replications: int | None = None,
    seed: int | None = None,
    anomaly_mode: AnomalyMode | None = None,
    p_stars: tuple[float, ...] | None = None,
    workers: int | None = None,
) -> ExperimentSummary:
    run = run_named_experiment(
        name,
        replications=replications,
        seed=seed,
        anomaly_mode=anomaly_mode,
        p_stars=p_stars,
        workers=workers,
    )
    rows = run.rows()
    written = [str(path) for path in write_experiment_outputs(run, out)] if out is not None else []
    records = [
        ExperimentRow(
            experiment=str(record["experiment"]),
            p_star=float(record["p_star"]),
            rep=int(record["rep"]),
            seed=int(record["seed"]),
            auc=None if record["auc"] is None or np.isnan(record["auc"]) else float(record["auc"]),
        )
        for record in rows.to_dict(orient="records")
    ]
    return ExperimentSummary(
        experiment=name,
        replications=replications or get_preset(name).replications,
        rows=records,
        failed=sum(1 for record in records if record["auc"] is None),
        written=written,
    )


def _list_feature_names_sync() -> FeatureNames:
    return FeatureNames(features=list(FEATURE_NAMES), count=len(FEATURE_NAMES))

