from __future__ import annotations

import json
import os
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal, cast

_VALID_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}

FEATURE_NAMES: tuple[str, ...] = (
    "node_count",
    "triangle_q99",
    "degree_q99",
    "edge_count",
    "edge_density",
    "transitivity",
    "assortativity",
    "mean_distance",
    "diameter",
    "isolated_proportion",
    "vertex_connectivity",
    "global_efficiency",
    "component_size_q99",
    "component_count",
    "closeness_ge_080_proportion",
    "betweenness_q99",
    "pagerank_q99",
    "hub_eigenvalue",
    "authority_eigenvalue",
    "coreness_q99",
)


def _parse_int(
    value: str | None,
    *,
    default: int,
    minimum: int,
    maximum: int,
    name: str,
) -> int:
    if value is None or value.strip() == "":
        return default
    try:
        parsed = int(value)
    except ValueError as exc:
        raise ValueError(f"Invalid integer value for {name}: {value!r}.") from exc
    if parsed < minimum or parsed > maximum:
        raise ValueError(f"Invalid value for {name}: {parsed}. Expected range is {minimum}..{maximum}.")
    return parsed


def _check_open_unit(value: float, *, name: str) -> float:
    if not 0.0 < value < 1.0:
        raise ValueError(f"Invalid value for {name}: {value}. Expected range is (0, 1).")
    return float(value)


def _check_int_range(value: int, *, minimum: int, maximum: int, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"Invalid integer value for {name}: {value!r}.")
    if value < minimum or value > maximum:
        raise ValueError(f"Invalid value for {name}: {value}. Expected range is {minimum}..{maximum}.")
    return value


def _validate_features(features: tuple[str, ...]) -> tuple[str, ...]:
    if not features:
        raise ValueError("features cannot be empty.")
    unknown = [name for name in features if name not in FEATURE_NAMES]
    if unknown:
        raise ValueError(f"Unknown feature names: {', '.join(unknown)}. Valid names: {', '.join(FEATURE_NAMES)}.")
    # Keep the canonical column order regardless of how the subset was listed.
    return tuple(name for name in FEATURE_NAMES if name in features)


@dataclass(frozen=True)
class RuntimeSettings:
    threads: int
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
    default_seed: int
    mcp_transport: Literal["stdio", "streamable-http"]
    mcp_host: str
    mcp_port: int

    @classmethod
    def from_env(cls) -> RuntimeSettings:
        log_level = os.getenv("TEMPOODD_LOG_LEVEL", "INFO").strip().upper()
        if log_level not in _VALID_LOG_LEVELS:
            raise ValueError(
                f"Invalid TEMPOODD_LOG_LEVEL {log_level!r}. Use one of: {', '.join(sorted(_VALID_LOG_LEVELS))}."
            )

        transport = os.getenv("MCP_TRANSPORT", "stdio").strip().lower()
        if transport not in {"stdio", "streamable-http"}:
            raise ValueError(f"Invalid MCP_TRANSPORT {transport!r}. Supported values: stdio, streamable-http.")

        return cls(
            threads=_parse_int(
                os.getenv("TEMPOODD_THREADS"),
                default=1,
                minimum=1,
                maximum=256,
                name="TEMPOODD_THREADS",
            ),
            log_level=cast(Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], log_level),
            default_seed=_parse_int(
                os.getenv("TEMPOODD_SEED"),
                default=20230101,
                minimum=0,
                maximum=2**63 - 1,
                name="TEMPOODD_SEED",
            ),
            mcp_transport=cast(Literal["stdio", "streamable-http"], transport),
            mcp_host=os.getenv("MCP_HOST", "127.0.0.1"),
            mcp_port=_parse_int(
                os.getenv("MCP_PORT"),
                default=8000,
                minimum=1,
                maximum=65535,
                name="MCP_PORT",
            ),
        )


@dataclass(frozen=True)
class ArimaConfig:
    max_p: int = 5
    max_q: int = 5
    max_d: int = 2
    stepwise: bool = True
    kpss_alpha: float = 0.05
    ljung_box_lag: int = 10
    min_length: int = 8
    sigma2_floor: float = 1e-12

    def __post_init__(self) -> None:
        _check_int_range(self.max_p, minimum=0, maximum=5, name="max_p")
        _check_int_range(self.max_q, minimum=0, maximum=5, name="max_q")
        _check_int_range(self.max_d, minimum=0, maximum=2, name="max_d")
        _check_open_unit(self.kpss_alpha, name="kpss_alpha")
        _check_int_range(self.ljung_box_lag, minimum=1, maximum=100, name="ljung_box_lag")
        _check_int_range(self.min_length, minimum=3, maximum=10_000, name="min_length")
        if self.sigma2_floor <= 0:
            raise ValueError(f"Invalid value for sigma2_floor: {self.sigma2_floor}. Must be positive.")


@dataclass(frozen=True)
class EmbedConfig:
    k: int = 2
    scale: Literal["mad", "qn"] = "mad"
    n_random_directions: int = 360
    refine_rounds: int = 3
    trim_lower: float = 0.025
    trim_upper: float = 0.975
    seed: int = 0

    def __post_init__(self) -> None:
        _check_int_range(self.k, minimum=1, maximum=20, name="k")
        if self.scale not in {"mad", "qn"}:
            raise ValueError(f"Invalid scale {self.scale!r}. Supported values: mad, qn.")
        _check_int_range(self.n_random_directions, minimum=0, maximum=100_000, name="n_random_directions")
        _check_int_range(self.refine_rounds, minimum=0, maximum=20, name="refine_rounds")
        _check_open_unit(self.trim_lower, name="trim_lower")
        _check_open_unit(self.trim_upper, name="trim_upper")
        if self.trim_lower >= self.trim_upper:
            raise ValueError("trim_lower must be smaller than trim_upper.")


@dataclass(frozen=True)
class LookoutConfig:
    kernel: Literal["gaussian"] = "gaussian"
    bandwidth_quantile: float = 0.90
    threshold_quantile: float = 0.90
    min_exceedances: int = 5
    auto_lower_threshold: bool = True

    def __post_init__(self) -> None:
        if self.kernel != "gaussian":
            raise ValueError(f"Invalid kernel {self.kernel!r}. Supported values: gaussian.")
        _check_open_unit(self.bandwidth_quantile, name="bandwidth_quantile")
        _check_open_unit(self.threshold_quantile, name="threshold_quantile")
        _check_int_range(self.min_exceedances, minimum=2, maximum=10_000, name="min_exceedances")


@dataclass(frozen=True)
class InputSpec:
    path: Path | None = None
    format: Literal["long", "dir"] = "long"
    nodes: Literal["observed", "fixed"] = "observed"
    directed: bool = False

    def __post_init__(self) -> None:
        if self.format not in {"long", "dir"}:
            raise ValueError(f"Invalid format {self.format!r}. Supported values: long, dir.")
        if self.nodes not in {"observed", "fixed"}:
            raise ValueError(f"Invalid nodes mode {self.nodes!r}. Supported values: observed, fixed.")


@dataclass(frozen=True)
class PipelineConfig:
    input: InputSpec = field(default_factory=InputSpec)
    alpha: float = 0.05
    features: tuple[str, ...] = FEATURE_NAMES
    arima: ArimaConfig = field(default_factory=ArimaConfig)
    embed: EmbedConfig = field(default_factory=EmbedConfig)
    lookout: LookoutConfig = field(default_factory=LookoutConfig)
    seed: int = 0
    out: Path | None = None
    threads: int = field(default_factory=lambda: SETTINGS.threads)

    def __post_init__(self) -> None:
        _check_open_unit(self.alpha, name="alpha")
        object.__setattr__(self, "features", _validate_features(tuple(self.features)))
        _check_int_range(self.seed, minimum=0, maximum=2**63 - 1, name="seed")
        _check_int_range(self.threads, minimum=1, maximum=256, name="threads")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any], *, base: PipelineConfig | None = None) -> PipelineConfig:
        """Build a config from flat keys mirroring the CLI flags, layered over ``base``."""
        unknown = sorted(set(values) - _FLAT_KEYS)
        if unknown:
            raise ValueError(f"Unknown configuration keys: {', '.join(unknown)}.")
        config = base or cls()
        items = {key: value for key, value in values.items() if value is not None}

        input_changes = {
            _INPUT_KEYS[key]: (Path(value) if key == "input" else value)
            for key, value in items.items()
            if key in _INPUT_KEYS
        }
        arima_changes = {key: value for key, value in items.items() if key in _ARIMA_KEYS}
        embed_changes = {key: value for key, value in items.items() if key in _EMBED_KEYS}
        lookout_changes = {key: value for key, value in items.items() if key in _LOOKOUT_KEYS}
        top_changes: dict[str, Any] = {key: value for key, value in items.items() if key in _TOP_KEYS}
        if "features" in top_changes:
            top_changes["features"] = _coerce_feature_list(top_changes["features"])
        if "out" in top_changes:
            top_changes["out"] = Path(top_changes["out"])
        if "seed" in top_changes and "seed" not in embed_changes:
            embed_changes["seed"] = top_changes["seed"]

        return replace(
            config,
            input=replace(config.input, **input_changes),
            arima=replace(config.arima, **arima_changes),
            embed=replace(config.embed, **embed_changes),
            lookout=replace(config.lookout, **lookout_changes),
            **top_changes,
        )


_INPUT_KEYS = {"input": "path", "format": "format", "nodes": "nodes", "directed": "directed"}
_ARIMA_KEYS = {"max_p", "max_q", "max_d", "stepwise", "kpss_alpha", "ljung_box_lag", "min_length"}
_EMBED_KEYS = {"k", "scale", "n_random_directions", "refine_rounds", "trim_lower", "trim_upper"}
_LOOKOUT_KEYS = {"bandwidth_quantile", "threshold_quantile", "min_exceedances", "auto_lower_threshold"}
_TOP_KEYS = {"alpha", "features", "seed", "out", "threads"}
_FLAT_KEYS = set(_INPUT_KEYS) | _ARIMA_KEYS | _EMBED_KEYS | _LOOKOUT_KEYS | _TOP_KEYS


def _coerce_feature_list(value: Any) -> tuple[str, ...]:
    if isinstance(value, str):
        return tuple(item.strip() for item in value.split(",") if item.strip())
    return tuple(str(item) for item in value)


def load_config(path: Path) -> dict[str, Any]:
    """Read a flat JSON config file; values are validated by ``PipelineConfig.from_mapping``."""
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"Invalid JSON in config file {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValueError(f"Config file {path} must contain a JSON object.")
    return payload


SETTINGS = RuntimeSettings.from_env()
