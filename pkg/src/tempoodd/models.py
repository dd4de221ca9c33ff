from __future__ import annotations

from typing_extensions import TypedDict


class GpdSummary(TypedDict):
    threshold: float
    threshold_quantile: float
    exceedance_rate: float
    scale: float
    shape: float
    method: str


class ReportRow(TypedDict):
    t: int
    label: int | str
    score: float
    cond_prob: float
    anomaly: bool


class DetectionSummary(TypedDict):
    alpha: float
    bandwidth: float
    gpd: GpdSummary
    features: list[str]
    dropped_features: list[str]
    zero_spread_features: list[str]
    robust_spreads: list[float]
    anomalies: list[int | str]
    rows: list[ReportRow]
    written: list[str]


class FeatureTable(TypedDict):
    feature_names: list[str]
    time_labels: list[int | str]
    rows: list[dict[str, float | None]]
    written: str | None


class SimulationSummary(TypedDict):
    model: str
    snapshots: int
    anomaly_time: int | None
    seed: int
    written: list[str]


class ExperimentRow(TypedDict):
    experiment: str
    p_star: float
    rep: int
    seed: int
    auc: float | None


class ExperimentSummary(TypedDict):
    experiment: str
    replications: int
    rows: list[ExperimentRow]
    failed: int
    written: list[str]


class FeatureNames(TypedDict):
    features: list[str]
    count: int
