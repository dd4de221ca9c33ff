"""Synthetic detection experiments scored by AUC."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import partial
from typing import Any

import numpy as np
import pandas as pd
from sklearn.metrics import roc_auc_score

from .errors import _format_error
from .generators import AnomalyMode, GeneratorSpec, generate_sequence
from .pipeline import detect
from .runtime import _parallel_map, logger
from .settings import SETTINGS, PipelineConfig


def auc(scores: np.ndarray | list[float], labels: np.ndarray | list[bool]) -> float:
    """Probability that a random positive outranks a random negative, ties counted as one half."""
    truth = np.asarray(labels, dtype=bool)
    if truth.all() or not truth.any():
        raise ValueError("AUC needs at least one positive and one negative label.")
    return float(roc_auc_score(truth, np.asarray(scores, dtype=np.float64)))


def replication_seed(master_seed: int, replication: int) -> int:
    """Seed of one replication, derived from the master seed and the replication index."""
    return int(np.random.SeedSequence([master_seed, replication]).generate_state(1, dtype=np.uint64)[0] >> 1)


@dataclass(frozen=True)
class ReplicationOutcome:
    replication: int
    seed: int
    auc: float | None
    error: str | None = None


@dataclass(frozen=True)
class ExperimentResult:
    spec: GeneratorSpec
    outcomes: tuple[ReplicationOutcome, ...]

    @property
    def auc_values(self) -> list[float]:
        return [outcome.auc for outcome in self.outcomes if outcome.auc is not None]

    @property
    def seeds(self) -> list[int]:
        return [outcome.seed for outcome in self.outcomes]

    @property
    def failures(self) -> list[ReplicationOutcome]:
        return [outcome for outcome in self.outcomes if outcome.error is not None]

    def config_echo(self) -> dict[str, Any]:
        return self.spec.manifest()


def _run_replication(job: tuple[int, int], spec: GeneratorSpec, config: PipelineConfig) -> ReplicationOutcome:
    replication, seed = job
    rep_spec = replace(spec, seed=seed)
    try:
        sequence = generate_sequence(rep_spec)
        result = detect(sequence, replace(config, threads=1))
        value = auc(1.0 - result.report.probabilities, rep_spec.labels())
    except Exception as exc:  # noqa: BLE001
        message = _format_error(f"replication {replication}", exc)
        logger.warning("Replication %d (seed %d) failed: %s", replication, seed, message)
        return ReplicationOutcome(replication=replication, seed=seed, auc=None, error=message)
    logger.info("Replication %d (seed %d): AUC %.4f", replication, seed, value)
    return ReplicationOutcome(replication=replication, seed=seed, auc=value)


def run_experiment(
    spec: GeneratorSpec,
    replications: int,
    *,
    config: PipelineConfig | None = None,
    workers: int | None = None,
) -> ExperimentResult:
    if replications < 1:
        raise ValueError(f"Invalid replication count {replications}. Must be at least 1.")
    if spec.length < 2:
        raise ValueError("no series to model: a sequence needs at least 2 snapshots.")
    config = config or PipelineConfig(threads=1)
    jobs = [(replication, replication_seed(spec.seed, replication)) for replication in range(replications)]
    outcomes = _parallel_map(partial(_run_replication, spec=spec, config=config), jobs, workers=workers)
    return ExperimentResult(spec=spec, outcomes=tuple(sorted(outcomes, key=lambda item: item.replication)))


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    description: str
    base: GeneratorSpec
    p_stars: tuple[float, ...]
    replications: int = 10

    def specs(
        self,
        *,
        seed: int,
        anomaly_mode: AnomalyMode | None = None,
        p_stars: tuple[float, ...] | None = None,
    ) -> list[GeneratorSpec]:
        mode = anomaly_mode or self.base.anomaly_mode
        return [
            replace(self.base, anomaly_offset=p_star, anomaly_mode=mode, seed=seed)
            for p_star in (p_stars or self.p_stars)
        ]


PRESETS: dict[str, ExperimentPreset] = {
    "exp1": ExperimentPreset(
        name="exp1",
        description="Erdos-Renyi, constant p=0.05, anomalous snapshot uses p*",
        base=GeneratorSpec(model="erdos_renyi", start=0.05, end=0.05, anomaly_mode="absolute"),
        p_stars=(0.1, 0.15, 0.2, 0.25),
    ),
    "exp2": ExperimentPreset(
        name="exp2",
        description="Erdos-Renyi, p rising 0.05 to 0.5, anomaly adds p*",
        base=GeneratorSpec(model="erdos_renyi", start=0.05, end=0.5),
        p_stars=(0.05, 0.1, 0.15, 0.2),
    ),
    "exp3": ExperimentPreset(
        name="exp3",
        description="Barabasi-Albert, attachment exponent rising 1.1 to 1.9, anomaly adds p*",
        base=GeneratorSpec(model="barabasi_albert", start=1.1, end=1.9),
        p_stars=(0.25, 0.3, 0.35, 0.4),
    ),
    "exp4": ExperimentPreset(
        name="exp4",
        description="Watts-Strogatz, rewiring probability rising 0.05 to 0.3, anomaly adds p*",
        base=GeneratorSpec(model="watts_strogatz", start=0.05, end=0.3),
        p_stars=(0.05, 0.1, 0.15, 0.2),
    ),
}


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"Unknown experiment {name!r}. Valid names: {', '.join(PRESETS)}.") from None


@dataclass(frozen=True)
class NamedExperimentRun:
    name: str
    results: tuple[ExperimentResult, ...]

    def rows(self) -> pd.DataFrame:
        records = [
            {
                "experiment": self.name,
                "p_star": result.spec.anomaly_offset,
                "rep": outcome.replication,
                "seed": outcome.seed,
                "auc": outcome.auc,
            }
            for result in self.results
            for outcome in result.outcomes
        ]
        return pd.DataFrame(records, columns=["experiment", "p_star", "rep", "seed", "auc"])

    def summary(self) -> pd.DataFrame:
        return summarize(self.rows())


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Median and quartiles of AUC per p*, with counts of failed replications."""
    records = []
    for (experiment, p_star), group in rows.groupby(["experiment", "p_star"], sort=True):
        values = group["auc"].dropna().to_numpy(dtype=np.float64)
        q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75]) if values.size else (np.nan,) * 3
        records.append(
            {
                "experiment": experiment,
                "p_star": p_star,
                "n": int(values.size),
                "failed": int(group["auc"].isna().sum()),
                "q1": q1,
                "median": median,
                "q3": q3,
                "min": values.min() if values.size else np.nan,
                "max": values.max() if values.size else np.nan,
            }
        )
    return pd.DataFrame(records, columns=["experiment", "p_star", "n", "failed", "q1", "median", "q3", "min", "max"])


def run_named_experiment(
    name: str,
    *,
    replications: int | None = None,
    seed: int | None = None,
    anomaly_mode: AnomalyMode | None = None,
    p_stars: tuple[float, ...] | None = None,
    workers: int | None = None,
) -> NamedExperimentRun:
    preset = get_preset(name)
    master = SETTINGS.default_seed if seed is None else seed
    reps = replications or preset.replications
    results = []
    for spec in preset.specs(seed=master, anomaly_mode=anomaly_mode, p_stars=p_stars):
        logger.info("Running %s with p*=%g (%s, %d replications)", name, spec.anomaly_offset, spec.anomaly_mode, reps)
        results.append(run_experiment(spec, reps, workers=workers))
    return NamedExperimentRun(name=name, results=tuple(results))
