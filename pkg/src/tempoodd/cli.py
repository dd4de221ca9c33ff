"""Command-line entry point: ``features``, ``detect``, ``simulate``, ``experiment`` and ``serve``."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path
from typing import Annotated, Any, TypeVar

import typer

from .detection_ops import (
    _compute_features_sync,
    _detect_anomalies_sync,
    _run_named_experiment_sync,
    _simulate_sequence_sync,
)
from .errors import _exit_code, _format_error
from .generators import AnomalyMode
from .settings import PipelineConfig, load_config

app = typer.Typer(
    name="tempoodd",
    help="Detect anomalous snapshots in temporal network sequences.",
    no_args_is_help=True,
    add_completion=False,
)

_R = TypeVar("_R")

InputOption = Annotated[Path | None, typer.Option("--input", "-i", help="Long edge CSV or directory of snapshots.")]
FormatOption = Annotated[str | None, typer.Option("--format", help="Input layout: long or dir.")]
NodesOption = Annotated[str | None, typer.Option("--nodes", help="Node universe: observed or fixed.")]
DirectedOption = Annotated[bool | None, typer.Option("--directed/--undirected", help="Treat edges as directed.")]
NodeListOption = Annotated[Path | None, typer.Option("--node-list", help="CSV of time,node declaring isolated nodes.")]
ConfigOption = Annotated[Path | None, typer.Option("--config", "-c", help="JSON file with flat config keys.")]
FeaturesOption = Annotated[str | None, typer.Option("--features", help="Comma-separated subset of features.")]
SeedOption = Annotated[int | None, typer.Option("--seed", help="Master random seed.")]
AnomalyModeOption = Annotated[
    str | None, typer.Option("--anomaly-mode", help="How p* applies at the anomaly: additive or absolute.")
]


def _run(action: str, func: Callable[..., _R], *args: Any, **kwargs: Any) -> _R:
    try:
        return func(*args, **kwargs)
    except Exception as exc:
        typer.echo(f"error: {_format_error(action, exc)}", err=True)
        raise typer.Exit(code=_exit_code(exc)) from None


def _resolve_config(config_path: Path | None, flags: dict[str, Any]) -> PipelineConfig:
    config = PipelineConfig()
    if config_path is not None:
        config = PipelineConfig.from_mapping(load_config(config_path), base=config)
    return PipelineConfig.from_mapping(flags, base=config)


def _anomaly_mode(value: str | None) -> AnomalyMode | None:
    if value is None:
        return None
    if value not in {"additive", "absolute"}:
        raise ValueError(f"Invalid anomaly mode {value!r}. Supported values: additive, absolute.")
    return value  # type: ignore[return-value]


@app.command()
def features(
    input_path: InputOption = None,
    out: Annotated[Path | None, typer.Option("--out", "-o", help="Feature CSV to write.")] = None,
    fmt: FormatOption = None,
    nodes: NodesOption = None,
    directed: DirectedOption = None,
    node_list: NodeListOption = None,
    feature_names: FeaturesOption = None,
    config: ConfigOption = None,
) -> None:
    """Compute the feature matrix of a sequence."""
    flags = {"input": input_path, "format": fmt, "nodes": nodes, "directed": directed, "features": feature_names}
    resolved = _run("features", _resolve_config, config, flags)
    table = _run("features", _compute_features_sync, resolved, node_list, out)
    if table["written"] is None:
        typer.echo(",".join(["t", *table["feature_names"]]))
        for label, row in zip(table["time_labels"], table["rows"], strict=True):
            cells = ["" if row[name] is None else repr(row[name]) for name in table["feature_names"]]
            typer.echo(",".join([str(label), *cells]))
    else:
        typer.echo(f"Wrote {len(table['rows'])} feature rows to {table['written']}")


@app.command()
def detect(
    input_path: InputOption = None,
    out: Annotated[Path | None, typer.Option("--out", "-o", help="Directory for the report files.")] = None,
    alpha: Annotated[float | None, typer.Option("--alpha", help="Significance level for flagging.")] = None,
    seed: SeedOption = None,
    fmt: FormatOption = None,
    nodes: NodesOption = None,
    directed: DirectedOption = None,
    node_list: NodeListOption = None,
    from_features: Annotated[
        Path | None, typer.Option("--from-features", help="Start from a saved feature CSV instead of graphs.")
    ] = None,
    k: Annotated[int | None, typer.Option("--k", help="Number of robust PCA directions.")] = None,
    scale: Annotated[str | None, typer.Option("--scale", help="Robust scale: mad or qn.")] = None,
    bandwidth_quantile: Annotated[float | None, typer.Option("--bandwidth-quantile")] = None,
    threshold_quantile: Annotated[float | None, typer.Option("--threshold-quantile")] = None,
    feature_names: FeaturesOption = None,
    config: ConfigOption = None,
) -> None:
    """Run the full detection pipeline and report per-snapshot conditional probabilities."""
    flags = {
        "input": input_path,
        "out": out,
        "alpha": alpha,
        "seed": seed,
        "format": fmt,
        "nodes": nodes,
        "directed": directed,
        "k": k,
        "scale": scale,
        "bandwidth_quantile": bandwidth_quantile,
        "threshold_quantile": threshold_quantile,
        "features": feature_names,
    }
    resolved = _run("detect", _resolve_config, config, flags)
    summary = _run("detect", _detect_anomalies_sync, resolved, from_features, node_list)
    for row in summary["rows"]:
        if row["anomaly"]:
            typer.echo(f"anomaly t={row['t']} label={row['label']} cond_prob={row['cond_prob']:.6g}")
    typer.echo(f"{len(summary['anomalies'])} of {len(summary['rows'])} snapshots flagged at alpha={summary['alpha']:g}")
    for path in summary["written"]:
        typer.echo(f"wrote {path}")


@app.command()
def simulate(
    out: Annotated[Path, typer.Option("--out", "-o", help="Directory for edges.csv, nodes.csv and manifest.json.")],
    model: Annotated[
        str, typer.Option("--model", help="er, ba, ws, density-spike, star or growing-drop.")
    ] = "er",
    experiment: Annotated[str | None, typer.Option("--experiment", help="Use a named experiment's setup.")] = None,
    p_star: Annotated[float | None, typer.Option("--p-star", help="Anomaly offset p*.")] = None,
    anomaly_mode: AnomalyModeOption = None,
    seed: SeedOption = None,
    node_count: Annotated[int | None, typer.Option("--n", help="Nodes per snapshot.")] = None,
    length: Annotated[int | None, typer.Option("--length", "-T", help="Number of snapshots.")] = None,
    anomaly_time: Annotated[int | None, typer.Option("--anomaly-time", help="1-based anomaly position.")] = None,
    start: Annotated[float | None, typer.Option("--start", help="Schedule value at t=1.")] = None,
    end: Annotated[float | None, typer.Option("--end", help="Schedule value at t=T.")] = None,
    edges_per_step: Annotated[int | None, typer.Option("--edges-per-step", help="Barabasi-Albert m.")] = None,
    k_ring: Annotated[int | None, typer.Option("--k-ring", help="Watts-Strogatz lattice half-degree.")] = None,
) -> None:
    """Generate a synthetic sequence with one planted anomaly."""
    overrides = {
        "node_count": node_count,
        "length": length,
        "anomaly_time": anomaly_time,
        "start": start,
        "end": end,
        "edges_per_step": edges_per_step,
        "k_ring": k_ring,
    }
    mode = _run("simulate", _anomaly_mode, anomaly_mode)
    summary = _run(
        "simulate",
        _simulate_sequence_sync,
        out,
        model=model,
        experiment=experiment,
        p_star=p_star,
        anomaly_mode=mode,
        seed=seed,
        overrides=overrides,
    )
    typer.echo(f"{summary['snapshots']} snapshots of {summary['model']}, anomaly at t={summary['anomaly_time']}")
    for path in summary["written"]:
        typer.echo(f"wrote {path}")


@app.command()
def experiment(
    name: Annotated[str, typer.Argument(help="exp1, exp2, exp3 or exp4.")],
    out: Annotated[Path | None, typer.Option("--out", "-o", help="Directory for the AUC tables.")] = None,
    reps: Annotated[int | None, typer.Option("--reps", help="Replications per p* value.")] = None,
    seed: SeedOption = None,
    anomaly_mode: AnomalyModeOption = None,
    p_star: Annotated[list[float] | None, typer.Option("--p-star", help="Restrict to these p* values.")] = None,
) -> None:
    """Run one of the synthetic AUC experiments."""
    mode = _run("experiment", _anomaly_mode, anomaly_mode)
    summary = _run(
        "experiment",
        _run_named_experiment_sync,
        name,
        out=out,
        replications=reps,
        seed=seed,
        anomaly_mode=mode,
        p_stars=tuple(p_star) if p_star else None,
    )
    typer.echo("experiment,p_star,rep,seed,auc")
    for row in summary["rows"]:
        auc = "" if row["auc"] is None else f"{row['auc']:.6f}"
        typer.echo(f"{row['experiment']},{row['p_star']:g},{row['rep']},{row['seed']},{auc}")
    if summary["failed"]:
        typer.echo(f"{summary['failed']} replication(s) failed; see the log for details.", err=True)
    for path in summary["written"]:
        typer.echo(f"wrote {path}")


@app.command()
def serve() -> None:
    """Start the MCP tool server using the MCP_* environment settings."""
    from .server import main as serve_main

    serve_main()


def main() -> None:
    app()


if __name__ == "__main__":
    main()
