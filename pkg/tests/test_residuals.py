from __future__ import annotations

import numpy as np
import pytest

from tempoodd.errors import FeatureDropped, PipelineError
from tempoodd.features import FeatureMatrix
from tempoodd.residuals import (
    FeatureSeries,
    auto_arima,
    impute_series,
    residualize_matrix,
    residuals,
)
from tempoodd.settings import FEATURE_NAMES, ArimaConfig


def _series(values: np.ndarray | list[float], name: str = "x") -> FeatureSeries:
    return FeatureSeries.from_values(values, name=name)


def test_impute_series_uses_median_of_observed() -> None:
    filled = impute_series(_series([1.0, np.nan, 3.0]))
    assert filled.values.tolist() == [1.0, 2.0, 3.0]
    assert not filled.mask.any()


def test_impute_series_without_gaps_is_identity() -> None:
    series = _series([4.0, 5.0, 6.0])
    assert impute_series(series) is series


def test_impute_series_all_missing_drops_feature() -> None:
    with pytest.raises(FeatureDropped) as info:
        impute_series(_series([np.nan, np.nan], name="assortativity"))
    assert info.value.feature == "assortativity"


def test_auto_arima_rejects_non_finite_values() -> None:
    with pytest.raises(ValueError, match="non-finite"):
        auto_arima(_series([1.0, np.nan] + [0.0] * 10))


def test_constant_series_gives_mean_only_model_and_zero_residuals() -> None:
    series = _series(np.full(30, 7.0))
    model = auto_arima(series)
    assert model.order == (0, 0, 0)
    assert model.degenerate
    assert model.sigma2 == pytest.approx(1e-12)
    assert np.all(residuals(model, series) == 0.0)


def test_short_series_falls_back_to_mean_only() -> None:
    series = _series([1.0, 2.0, 4.0, 3.0, 5.0])
    model = auto_arima(series)
    assert model.degenerate
    assert residuals(model, series) == pytest.approx(np.array([1.0, 2.0, 4.0, 3.0, 5.0]) - 3.0)


def test_white_noise_selects_small_orders() -> None:
    small = 0
    for seed in range(10):
        noise = np.random.default_rng(seed).standard_normal(200)
        p, _, q = auto_arima(_series(noise)).order
        small += p + q <= 1
    assert small >= 8


def test_linear_trend_is_differenced() -> None:
    rng = np.random.default_rng(1)
    trend = 0.5 * np.arange(100) + rng.normal(scale=0.2, size=100)
    assert auto_arima(_series(trend)).order[1] >= 1


def test_ar1_residual_variance_matches_innovations() -> None:
    rng = np.random.default_rng(5)
    shocks = rng.standard_normal(500)
    values = np.zeros(500)
    for t in range(1, 500):
        values[t] = 0.8 * values[t - 1] + shocks[t]
    series = _series(values)
    model = auto_arima(series)
    resid = residuals(model, series)
    assert resid.shape == (500,)
    assert np.var(resid[model.order[1] :]) == pytest.approx(1.0, rel=0.15)


def test_level_drop_gives_largest_residual_at_drop() -> None:
    rng = np.random.default_rng(2)
    t = np.arange(1, 101)
    values = 200 + 4.0 * t + rng.normal(scale=1.0, size=100)
    values[t >= 60] -= 150
    series = _series(values)
    model = auto_arima(series)
    resid = residuals(model, series)
    assert int(np.argmax(np.abs(resid))) == 59
    assert np.all(resid[: model.order[1]] == 0.0)


def test_residualize_matrix_drops_empty_columns() -> None:
    rng = np.random.default_rng(4)
    values = rng.normal(size=(40, 3))
    values[:, 1] = np.nan
    fm = FeatureMatrix(
        values=values,
        mask=np.isnan(values),
        feature_names=("node_count", "edge_count", "diameter"),
        time_labels=tuple(range(1, 41)),
    )
    rm = residualize_matrix(fm, workers=1)
    assert rm.feature_names == ("node_count", "diameter")
    assert rm.dropped == ("edge_count",)
    assert rm.values.shape == (40, 2)
    assert len(rm.diagnostics) == 2
    assert all(item.ljung_box_pvalue == item.ljung_box_pvalue for item in rm.diagnostics)


def test_residualize_matrix_needs_two_columns() -> None:
    values = np.column_stack([np.arange(20.0), np.full(20, np.nan)])
    fm = FeatureMatrix(
        values=values,
        mask=np.isnan(values),
        feature_names=("node_count", "edge_count"),
        time_labels=tuple(range(1, 21)),
    )
    with pytest.raises(PipelineError) as info:
        residualize_matrix(fm, workers=1)
    assert info.value.stage == "arima"


def test_residualize_matrix_rejects_short_sequences() -> None:
    values = np.ones((5, 2))
    fm = FeatureMatrix(
        values=values,
        mask=np.zeros_like(values, dtype=bool),
        feature_names=("node_count", "edge_count"),
        time_labels=tuple(range(1, 6)),
    )
    with pytest.raises(ValueError, match="sequence too short for time-series modelling"):
        residualize_matrix(fm, ArimaConfig(), workers=1)


def test_all_constant_matrix_gives_zero_residuals() -> None:
    values = np.tile(np.arange(1.0, 21.0), (12, 1))
    fm = FeatureMatrix(
        values=values,
        mask=np.zeros_like(values, dtype=bool),
        feature_names=FEATURE_NAMES,
        time_labels=tuple(range(1, 13)),
    )
    rm = residualize_matrix(fm, workers=1)
    assert rm.feature_names == FEATURE_NAMES
    assert rm.values.shape == (12, 20)
    assert not rm.values.any()
    assert all(model.degenerate and model.order == (0, 0, 0) for model in rm.models)


def test_identical_columns_give_identical_residuals() -> None:
    rng = np.random.default_rng(8)
    column = np.cumsum(rng.normal(size=60)) + 0.1 * np.arange(60)
    values = np.column_stack([column, column, rng.normal(size=60)])
    fm = FeatureMatrix(
        values=values,
        mask=np.zeros_like(values, dtype=bool),
        feature_names=("node_count", "edge_count", "diameter"),
        time_labels=tuple(range(1, 61)),
    )
    rm = residualize_matrix(fm, workers=1)
    assert rm.models[0].order == rm.models[1].order
    assert rm.values[:, 0].tolist() == rm.values[:, 1].tolist()


def _ar1(rng: np.random.Generator, phi: float, size: int, burn_in: int = 100) -> np.ndarray:
    shocks = rng.standard_normal(size + burn_in)
    values = np.zeros(size + burn_in)
    for t in range(1, size + burn_in):
        values[t] = phi * values[t - 1] + shocks[t]
    return values[burn_in:]


@pytest.mark.slow
def test_fitted_residuals_pass_ljung_box_in_most_replications() -> None:
    pvalues: list[float] = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        values = np.column_stack([_ar1(rng, 0.6, 150), _ar1(rng, -0.4, 150)])
        fm = FeatureMatrix(
            values=values,
            mask=np.zeros_like(values, dtype=bool),
            feature_names=("node_count", "edge_count"),
            time_labels=tuple(range(1, 151)),
        )
        rm = residualize_matrix(fm, workers=1)
        pvalues.extend(item.ljung_box_pvalue for item in rm.diagnostics)
    assert len(pvalues) == 40
    rejections = sum(pvalue < 0.01 for pvalue in pvalues)
    assert rejections < 0.05 * len(pvalues)
