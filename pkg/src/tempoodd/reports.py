"""Report writers: CSV and JSON tables plus SVG charts."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from .embed import EmbeddedPoints
from .experiments import NamedExperimentRun, summarize
from .features import write_feature_matrix
from .graphs import TemporalNetworkSequence, write_sequence
from .lookout import AnomalyReport
from .pipeline import DetectionResult
from .residuals import ResidualMatrix

matplotlib.use("Agg")

_CSV_OPTIONS: dict[str, Any] = {"index": False, "lineterminator": "\n", "float_format": "%.17g"}
_SVG_RC = {"svg.hashsalt": "tempoodd", "svg.fonttype": "none"}


def _json_number(value: float) -> float | None:
    return None if value is None or not math.isfinite(value) else float(value)


def report_frame(report: AnomalyReport) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "t": np.arange(1, len(report.time_labels) + 1),
            "label": list(report.time_labels),
            "score": report.outlier_scores,
            "cond_prob": report.probabilities,
            "anomaly": report.flags.astype(int),
        }
    )


def write_report_csv(report: AnomalyReport, path: Path) -> Path:
    report_frame(report).to_csv(path, **_CSV_OPTIONS)
    return path


def report_payload(result: DetectionResult) -> dict[str, Any]:
    report = result.report
    return {
        "alpha": report.alpha,
        "bandwidth": report.bandwidth,
        "gpd": {
            "threshold": report.gpd.threshold,
            "threshold_quantile": report.gpd.threshold_quantile,
            "exceedance_rate": report.gpd.exceedance_rate,
            "scale": report.gpd.scale,
            "shape": report.gpd.shape,
            "method": report.gpd.method,
        },
        "features": list(result.residuals.feature_names),
        "dropped_features": list(result.residuals.dropped),
        "zero_spread_features": list(result.scaled.flagged),
        "robust_spreads": list(result.embedding.spreads),
        "anomalies": list(report.anomalies),
        "rows": [
            {
                "t": index + 1,
                "label": label,
                "score": float(score),
                "cond_prob": float(probability),
                "anomaly": bool(flag),
            }
            for index, (label, score, probability, flag) in enumerate(
                zip(report.time_labels, report.outlier_scores, report.probabilities, report.flags, strict=True)
            )
        ],
    }


def write_report_json(result: DetectionResult, path: Path) -> Path:
    path.write_text(json.dumps(report_payload(result), indent=2, default=str) + "\n", encoding="utf-8")
    return path


def write_embedding_csv(embedding: EmbeddedPoints, path: Path) -> Path:
    frame = pd.DataFrame(embedding.scores, columns=[f"score{i + 1}" for i in range(embedding.scores.shape[1])])
    frame.insert(0, "t", np.arange(1, embedding.scores.shape[0] + 1))
    frame.to_csv(path, **_CSV_OPTIONS)
    return path


def write_diagnostics_csv(residuals: ResidualMatrix, path: Path) -> Path:
    frame = pd.DataFrame(
        [
            {
                "feature": item.feature,
                "p": item.order[0],
                "d": item.order[1],
                "q": item.order[2],
                "aicc": _json_number(item.aicc),
                "residual_variance": item.residual_variance,
                "ljung_box_stat": _json_number(item.ljung_box_stat),
                "ljung_box_pvalue": _json_number(item.ljung_box_pvalue),
            }
            for item in residuals.diagnostics
        ],
        columns=["feature", "p", "d", "q", "aicc", "residual_variance", "ljung_box_stat", "ljung_box_pvalue"],
    )
    frame.to_csv(path, **_CSV_OPTIONS)
    return path


def _save_svg(figure: Figure, path: Path) -> Path:
    with matplotlib.rc_context(_SVG_RC):
        figure.savefig(path, format="svg", metadata={"Date": None})
    return path


def write_probability_svg(report: AnomalyReport, path: Path, *, title: str = "Conditional probability") -> Path:
    """Line chart of the conditional probabilities with a dashed line at alpha."""
    figure = Figure(figsize=(8, 3.5))
    axes = figure.add_subplot()
    positions = np.arange(1, len(report.time_labels) + 1)
    axes.plot(positions, report.probabilities, color="#1f4e79", linewidth=1.2, marker="o", markersize=2.5)
    flagged = np.flatnonzero(report.flags)
    if flagged.size:
        axes.scatter(positions[flagged], report.probabilities[flagged], color="#c0392b", zorder=3, s=18)
    axes.axhline(report.alpha, color="#c0392b", linestyle="--", linewidth=1.0, label=f"alpha = {report.alpha:g}")
    axes.set_xlabel("t")
    axes.set_ylabel("conditional probability")
    axes.set_ylim(0.0, 1.0)
    axes.set_title(title)
    axes.legend(loc="upper right", frameon=False)
    figure.tight_layout()
    return _save_svg(figure, path)


def write_experiment_svg(summary: pd.DataFrame, path: Path, *, title: str) -> Path:
    """Median AUC per p* with quartile bars and min/max whiskers."""
    figure = Figure(figsize=(6, 4))
    axes = figure.add_subplot()
    x = np.arange(summary.shape[0])
    medians = summary["median"].to_numpy(dtype=np.float64)
    axes.vlines(x, summary["min"], summary["max"], color="#7f8c8d", linewidth=1.0)
    axes.vlines(x, summary["q1"], summary["q3"], color="#1f4e79", linewidth=8.0)
    axes.scatter(x, medians, color="white", edgecolors="#1f4e79", zorder=3, s=30)
    axes.set_xticks(x, [f"{value:g}" for value in summary["p_star"]])
    axes.set_xlabel("p*")
    axes.set_ylabel("AUC")
    axes.set_ylim(0.0, 1.05)
    axes.set_title(title)
    figure.tight_layout()
    return _save_svg(figure, path)


def write_detection_outputs(
    result: DetectionResult,
    out: Path,
    *,
    include_features: bool = True,
    include_embedding: bool = True,
    include_diagnostics: bool = True,
    include_chart: bool = True,
) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = [
        write_report_csv(result.report, out / "report.csv"),
        write_report_json(result, out / "report.json"),
    ]
    if include_features:
        write_feature_matrix(result.features, out / "features.csv")
        written.append(out / "features.csv")
    if include_embedding:
        written.append(write_embedding_csv(result.embedding, out / "embedding.csv"))
    if include_diagnostics:
        written.append(write_diagnostics_csv(result.residuals, out / "arima_diagnostics.csv"))
    if include_chart:
        written.append(write_probability_svg(result.report, out / "cond_prob.svg"))
    return written


def write_experiment_outputs(run: NamedExperimentRun, out: Path) -> list[Path]:
    """Per-replication AUC rows, the per-p* summary, and its chart."""
    out.mkdir(parents=True, exist_ok=True)
    rows = run.rows()
    summary = summarize(rows)
    rows_path = out / f"{run.name}_auc.csv"
    summary_path = out / f"{run.name}_summary.csv"
    rows.to_csv(rows_path, **_CSV_OPTIONS)
    summary.to_csv(summary_path, **_CSV_OPTIONS)
    written = [rows_path, summary_path]
    if summary["n"].gt(0).any():
        chart = out / f"{run.name}_auc.svg"
        written.append(write_experiment_svg(summary.dropna(subset=["median"]), chart, title=run.name))
    return written


def write_simulation(
    sequence: TemporalNetworkSequence,
    manifest: dict[str, Any],
    out: Path,
) -> list[Path]:
    """Long edge CSV, its node list, and a JSON manifest describing how it was generated."""
    out.mkdir(parents=True, exist_ok=True)
    edges_path, nodes_path, manifest_path = out / "edges.csv", out / "nodes.csv", out / "manifest.json"
    write_sequence(sequence, edges_path, node_list=nodes_path)
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [edges_path, nodes_path, manifest_path]
