"""Automatic ARIMA modelling of each feature series and its one-step in-sample residuals."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from statsmodels.stats.diagnostic import acorr_ljungbox
from statsmodels.tsa.arima.model import ARIMA
from statsmodels.tsa.stattools import kpss

from .errors import FeatureDropped, PipelineError
from .features import FeatureMatrix
from .runtime import _parallel_map, logger
from .settings import ArimaConfig

_STARTING_ORDERS = ((2, 2), (0, 0), (1, 0), (0, 1))
_FLAT_TOL = 1e-12


@dataclass(frozen=True)
class FeatureSeries:
    values: np.ndarray
    mask: np.ndarray
    feature_index: int = 0
    name: str = ""

    @classmethod
    def from_values(cls, values: list[float] | np.ndarray, *, name: str = "", feature_index: int = 0) -> FeatureSeries:
        data = np.asarray(values, dtype=np.float64)
        return cls(values=data, mask=np.isnan(data), feature_index=feature_index, name=name)


@dataclass(frozen=True)
class ArimaModel:
    order: tuple[int, int, int]
    ar_coefficients: tuple[float, ...]
    ma_coefficients: tuple[float, ...]
    intercept: float
    sigma2: float
    information_criterion: float
    include_constant: bool
    params: tuple[float, ...] = field(default=(), repr=False)
    degenerate: bool = False


@dataclass(frozen=True)
class ArimaDiagnostics:
    feature: str
    order: tuple[int, int, int]
    aicc: float
    residual_variance: float
    ljung_box_stat: float
    ljung_box_pvalue: float


@dataclass(frozen=True)
class ResidualMatrix:
    values: np.ndarray
    mask: np.ndarray
    feature_names: tuple[str, ...]
    time_labels: tuple[int | str, ...]
    dropped: tuple[str, ...] = ()
    models: tuple[ArimaModel, ...] = ()
    diagnostics: tuple[ArimaDiagnostics, ...] = ()


def impute_series(s: FeatureSeries) -> FeatureSeries:
    """Replace masked entries with the median of the observed ones."""
    observed = s.values[~s.mask]
    if observed.size == 0:
        raise FeatureDropped(s.name or f"feature_{s.feature_index}")
    if not s.mask.any():
        return s
    filled = np.where(s.mask, float(np.median(observed)), s.values)
    return FeatureSeries(values=filled, mask=np.zeros_like(s.mask), feature_index=s.feature_index, name=s.name)


def _is_flat(values: np.ndarray) -> bool:
    return values.size == 0 or float(np.ptp(values)) <= _FLAT_TOL * max(1.0, float(np.max(np.abs(values))))


def _kpss_pvalue(values: np.ndarray) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return float(kpss(values, regression="c", nlags="auto")[1])


def _choose_differencing(values: np.ndarray, config: ArimaConfig) -> int:
    d = 0
    current = values
    while d < config.max_d and current.size > 3 and not _is_flat(current):
        if _kpss_pvalue(current) >= config.kpss_alpha:
            break
        current = np.diff(current)
        d += 1
    return d


def _degenerate_model(differenced: np.ndarray, d: int, config: ArimaConfig) -> ArimaModel:
    mean = float(differenced.mean()) if differenced.size else 0.0
    variance = float(differenced.var()) if differenced.size else 0.0
    return ArimaModel(
        order=(0, d, 0),
        ar_coefficients=(),
        ma_coefficients=(),
        intercept=mean,
        sigma2=max(variance, config.sigma2_floor),
        information_criterion=math.nan,
        include_constant=True,
        degenerate=True,
    )


def _fit_candidate(
    differenced: np.ndarray, p: int, q: int, constant: bool
) -> tuple[float, np.ndarray, dict[str, float]] | None:
    # aicc is undefined once parameters exhaust the effective sample
    n_params = p + q + int(constant) + 1
    if n_params >= differenced.size - 1:
        return None
    model = ARIMA(differenced, order=(p, 0, q), trend="c" if constant else "n")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = model.fit()
    except (np.linalg.LinAlgError, ValueError, IndexError) as exc:
        logger.debug("ARIMA(%d,0,%d) constant=%s failed: %s", p, q, constant, exc)
        return None
    converged = bool(getattr(result, "mle_retvals", {}) and result.mle_retvals.get("converged", True))
    aicc = float(result.aicc)
    if not converged or not math.isfinite(aicc):
        logger.debug("ARIMA(%d,0,%d) constant=%s skipped: converged=%s aicc=%s", p, q, constant, converged, aicc)
        return None
    return aicc, np.asarray(result.params, dtype=np.float64), dict(zip(model.param_names, result.params, strict=True))


def _stepwise_search(
    differenced: np.ndarray, d: int, config: ArimaConfig
) -> tuple[tuple[int, int, bool], tuple[float, np.ndarray, dict[str, float]]] | None:
    constants = (True, False) if d < 2 else (False,)
    cache: dict[tuple[int, int, bool], tuple[float, np.ndarray, dict[str, float]] | None] = {}

    def evaluate(key: tuple[int, int, bool]) -> tuple[float, np.ndarray, dict[str, float]] | None:
        if key not in cache:
            cache[key] = _fit_candidate(differenced, *key)
        return cache[key]

    if config.stepwise:
        start = [(p, q, constants[0]) for p, q in _STARTING_ORDERS if p <= config.max_p and q <= config.max_q]
        if d < 2:
            start.append((0, 0, False))
        for key in start:
            evaluate(key)
        best = _best(cache)
        improved = best is not None
        while improved and best is not None:
            improved = False
            p, q, constant = best
            neighbours = [(p + dp, q, constant) for dp in (-1, 1)] + [(p, q + dq, constant) for dq in (-1, 1)]
            neighbours += [(p, q, other) for other in constants if other != constant]
            for key in neighbours:
                if not (0 <= key[0] <= config.max_p and 0 <= key[1] <= config.max_q) or key in cache:
                    continue
                result = evaluate(key)
                if result is not None and result[0] < cache[best][0]:  # type: ignore[index]
                    best, improved = key, True
    else:
        for p in range(config.max_p + 1):
            for q in range(config.max_q + 1):
                for constant in constants:
                    evaluate((p, q, constant))
        best = _best(cache)

    if best is None:
        return None
    chosen = cache[best]
    assert chosen is not None
    return best, chosen


def _best(
    cache: dict[tuple[int, int, bool], tuple[float, np.ndarray, dict[str, float]] | None],
) -> tuple[int, int, bool] | None:
    fitted = [(result[0], key) for key, result in cache.items() if result is not None]
    return min(fitted)[1] if fitted else None


def auto_arima(s: FeatureSeries, config: ArimaConfig | None = None) -> ArimaModel:
    """Select d by repeated KPSS tests, then (p, q, constant) by stepwise AICc search."""
    config = config or ArimaConfig()
    values = np.asarray(s.values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"Series {s.name or s.feature_index} contains non-finite values; impute it first.")
    if values.size < config.min_length or _is_flat(values):
        return _degenerate_model(values, 0, config)

    d = _choose_differencing(values, config)
    differenced = np.diff(values, n=d) if d else values
    if _is_flat(differenced):
        return _degenerate_model(differenced, d, config)

    found = _stepwise_search(differenced, d, config)
    if found is None:
        logger.warning("No ARIMA candidate converged for %s; using a mean-only model.", s.name or s.feature_index)
        return _degenerate_model(differenced, d, config)
    (p, q, constant), (aicc, params, named) = found
    return ArimaModel(
        order=(p, d, q),
        ar_coefficients=tuple(named[f"ar.L{lag}"] for lag in range(1, p + 1)),
        ma_coefficients=tuple(named[f"ma.L{lag}"] for lag in range(1, q + 1)),
        intercept=float(named.get("const", 0.0)),
        sigma2=max(float(named["sigma2"]), config.sigma2_floor),
        information_criterion=aicc,
        include_constant=constant,
        params=tuple(float(value) for value in params),
    )


def residuals(m: ArimaModel, s: FeatureSeries) -> np.ndarray:
    """One-step in-sample residuals; the first ``d`` entries are 0."""
    values = np.asarray(s.values, dtype=np.float64)
    p, d, q = m.order
    differenced = np.diff(values, n=d) if d else values
    if m.degenerate:
        innovations = differenced - m.intercept
        if _is_flat(innovations):
            innovations = np.zeros_like(innovations)
    else:
        model = ARIMA(differenced, order=(p, 0, q), trend="c" if m.include_constant else "n")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            innovations = np.asarray(model.filter(np.asarray(m.params)).resid, dtype=np.float64)
    return np.concatenate([np.zeros(d), innovations])


def _ljung_box(resid: np.ndarray, d: int, lag: int) -> tuple[float, float]:
    body = resid[d:]
    if body.size <= lag + 1 or _is_flat(body):
        return math.nan, math.nan
    table = acorr_ljungbox(body, lags=[lag], return_df=True)
    return float(table["lb_stat"].iloc[0]), float(table["lb_pvalue"].iloc[0])


def _fit_column(
    column: tuple[str, int, np.ndarray, np.ndarray], config: ArimaConfig
) -> tuple[str, ArimaModel, np.ndarray, ArimaDiagnostics] | str:
    name, index, values, mask = column
    try:
        series = impute_series(FeatureSeries(values=values, mask=mask, feature_index=index, name=name))
    except FeatureDropped:
        return name
    model = auto_arima(series, config)
    resid = residuals(model, series)
    stat, pvalue = _ljung_box(resid, model.order[1], config.ljung_box_lag)
    diagnostics = ArimaDiagnostics(
        feature=name,
        order=model.order,
        aicc=model.information_criterion,
        residual_variance=float(np.var(resid[model.order[1] :])) if resid.size > model.order[1] else 0.0,
        ljung_box_stat=stat,
        ljung_box_pvalue=pvalue,
    )
    return name, model, resid, diagnostics


def residualize_matrix(
    fm: FeatureMatrix, config: ArimaConfig | None = None, *, workers: int | None = None
) -> ResidualMatrix:
    config = config or ArimaConfig()
    if fm.length < config.min_length:
        raise ValueError(
            f"sequence too short for time-series modelling: T={fm.length}, need at least {config.min_length}."
        )
    columns = [
        (name, index, fm.values[:, index].copy(), fm.mask[:, index].copy())
        for index, name in enumerate(fm.feature_names)
    ]
    outcomes = _parallel_map(partial(_fit_column, config=config), columns, workers=workers)

    kept: list[tuple[str, ArimaModel, np.ndarray, ArimaDiagnostics]] = []
    dropped: list[str] = []
    for outcome in outcomes:
        if isinstance(outcome, str):
            logger.warning("Feature %s has no observed values; column dropped.", outcome)
            dropped.append(outcome)
        else:
            kept.append(outcome)
    if len(kept) < 2:
        raise PipelineError("arima", f"Only {len(kept)} feature column(s) survived imputation; need at least 2.")

    names = tuple(name for name, *_ in kept)
    positions = [fm.feature_names.index(name) for name in names]
    logger.info(
        "Fitted ARIMA models for %d features: %s",
        len(kept),
        ", ".join(f"{name}{model.order}" for name, model, *_ in kept),
    )
    return ResidualMatrix(
        values=np.column_stack([resid for *_, resid, _ in kept]),
        mask=fm.mask[:, positions],
        feature_names=names,
        time_labels=fm.time_labels,
        dropped=tuple(dropped),
        models=tuple(model for _, model, *_ in kept),
        diagnostics=tuple(diag for *_, diag in kept),
    )
