"""Random graph models and the synthetic dynamic-network sequences built from them."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Literal

import networkx as nx
import numpy as np

from .graphs import StaticGraph, TemporalNetworkSequence, build_graph
from .runtime import logger

ModelName = Literal["erdos_renyi", "barabasi_albert", "watts_strogatz"]
AnomalyMode = Literal["additive", "absolute"]
MODEL_NAMES: tuple[str, ...] = ("erdos_renyi", "barabasi_albert", "watts_strogatz")


def _nx_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**32 - 1))


def _from_networkx(graph: nx.Graph) -> StaticGraph:
    return build_graph(graph.number_of_nodes(), graph.edges())


def param_schedule(start: float, end: float, T: int, t: int) -> float:  # noqa: N803
    """Linear interpolation from ``start`` at t=1 to ``end`` at t=T."""
    if T < 2:
        raise ValueError(f"Invalid value for T: {T}. A schedule needs at least 2 time points.")
    if not 1 <= t <= T:
        raise ValueError(f"Invalid value for t: {t}. Expected range is 1..{T}.")
    return start + (end - start) * (t - 1) / (T - 1)


def gen_erdos_renyi(n: int, p: float, rng: np.random.Generator) -> StaticGraph:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Invalid edge probability {p}. Expected range is 0..1.")
    return _from_networkx(nx.gnp_random_graph(n, p, seed=_nx_seed(rng)))


def gen_barabasi_albert(n: int, alpha: float, m: int, rng: np.random.Generator) -> StaticGraph:
    """Nonlinear preferential attachment: targets drawn with weight ``k**alpha + 1``."""
    if alpha < 0:
        raise ValueError(f"Invalid attachment exponent {alpha}. Must be nonnegative.")
    if m < 1:
        raise ValueError(f"Invalid edges per step {m}. Must be at least 1.")
    degrees = np.zeros(n, dtype=np.float64)
    edges: list[tuple[int, int]] = []
    for new in range(1, n):
        weights = degrees[:new] ** alpha + 1.0
        picks = rng.choice(new, size=min(m, new), replace=False, p=weights / weights.sum())
        for target in picks.tolist():
            edges.append((target, new))
            degrees[target] += 1
        degrees[new] += picks.size
    return build_graph(n, edges)


def gen_watts_strogatz(n: int, k_ring: int, p_rewire: float, rng: np.random.Generator) -> StaticGraph:
    if not 1 <= k_ring < n / 2:
        raise ValueError(f"Invalid lattice half-degree {k_ring} for {n} nodes. Expected 1 <= k_ring < n/2.")
    if not 0.0 <= p_rewire <= 1.0:
        raise ValueError(f"Invalid rewiring probability {p_rewire}. Expected range is 0..1.")
    return _from_networkx(nx.watts_strogatz_graph(n, 2 * k_ring, p_rewire, seed=_nx_seed(rng)))


def _random_edges(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """``m`` distinct undirected pairs drawn uniformly from the ``n`` nodes."""
    rows, cols = np.triu_indices(n, k=1)
    if m > rows.size:
        raise ValueError(f"Cannot place {m} distinct edges on {n} nodes.")
    chosen = rng.choice(rows.size, size=m, replace=False)
    return list(zip(rows[chosen].tolist(), cols[chosen].tolist(), strict=True))


def _sequence(snapshots: list[StaticGraph]) -> TemporalNetworkSequence:
    return TemporalNetworkSequence(snapshots=tuple(snapshots), time_labels=tuple(range(1, len(snapshots) + 1)))


def gen_density_spike_sequence(
    T: int = 20,  # noqa: N803
    p: float = 0.05,
    p_anomaly: float = 0.2,
    anomaly_time: int | None = None,
    node_range: tuple[int, int] = (50, 55),
    *,
    rng: np.random.Generator,
) -> TemporalNetworkSequence:
    """Independent G(n, p) snapshots with n uniform on ``node_range``; one snapshot is denser."""
    anomaly = T if anomaly_time is None else anomaly_time
    snapshots = []
    for t in range(1, T + 1):
        n = int(rng.integers(node_range[0], node_range[1] + 1))
        snapshots.append(gen_erdos_renyi(n, p_anomaly if t == anomaly else p, rng))
    return _sequence(snapshots)


def gen_star_sequence(
    T: int = 20,  # noqa: N803
    edge_count: int = 100,
    anomaly_time: int | None = None,
    node_range: tuple[int, int] = (50, 55),
    *,
    rng: np.random.Generator,
) -> TemporalNetworkSequence:
    """Snapshots with exactly ``edge_count`` random edges; the anomalous one is a star on one hub."""
    low, high = node_range
    if low < edge_count + 1:
        logger.warning(
            "A %d-edge star needs at least %d nodes; raising node range %s to start there.",
            edge_count,
            edge_count + 1,
            node_range,
        )
        high += edge_count + 1 - low
        low = edge_count + 1
    anomaly = T if anomaly_time is None else anomaly_time
    snapshots = []
    for t in range(1, T + 1):
        n = int(rng.integers(low, high + 1))
        if t == anomaly:
            hub = int(rng.integers(n))
            leaves = rng.choice([node for node in range(n) if node != hub], size=edge_count, replace=False)
            snapshots.append(build_graph(n, [(hub, int(leaf)) for leaf in leaves]))
        else:
            snapshots.append(build_graph(n, _random_edges(n, edge_count, rng)))
    return _sequence(snapshots)


def gen_growing_edges_sequence(
    T: int = 100,  # noqa: N803
    drop_time: int = 60,
    n: int = 100,
    start_edges: int = 200,
    slope: int = 4,
    drop: int = 150,
    *,
    rng: np.random.Generator,
) -> TemporalNetworkSequence:
    """Uniform random graphs whose edge count grows linearly and falls by ``drop`` from ``drop_time`` on."""
    snapshots = []
    for t in range(1, T + 1):
        m = start_edges + slope * (t - 1) - (drop if t >= drop_time else 0)
        snapshots.append(build_graph(n, _random_edges(n, max(m, 0), rng)))
    return _sequence(snapshots)


@dataclass(frozen=True)
class GeneratorSpec:
    model: ModelName = "erdos_renyi"
    node_count: int = 100
    length: int = 100
    start: float = 0.05
    end: float = 0.05
    anomaly_time: int = 50
    anomaly_offset: float = 0.25
    anomaly_mode: AnomalyMode = "additive"
    edges_per_step: int = 1
    k_ring: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model not in MODEL_NAMES:
            raise ValueError(f"Invalid model {self.model!r}. Supported values: {', '.join(MODEL_NAMES)}.")
        if self.anomaly_mode not in {"additive", "absolute"}:
            raise ValueError(f"Invalid anomaly mode {self.anomaly_mode!r}. Supported values: additive, absolute.")
        if self.node_count < 2:
            raise ValueError(f"Invalid node_count {self.node_count}. Must be at least 2.")
        if self.length < 2:
            raise ValueError(f"Invalid length {self.length}: no series to model with fewer than 2 snapshots.")
        if not 1 <= self.anomaly_time <= self.length:
            raise ValueError(f"Invalid anomaly_time {self.anomaly_time}. Expected range is 1..{self.length}.")
        if self.model == "watts_strogatz" and not 1 <= self.k_ring < self.node_count / 2:
            raise ValueError(f"Invalid k_ring {self.k_ring} for {self.node_count} nodes.")
        if self.model == "barabasi_albert" and self.edges_per_step < 1:
            raise ValueError(f"Invalid edges_per_step {self.edges_per_step}. Must be at least 1.")
        for t, value in ((1, self.start), (self.length, self.end), (self.anomaly_time, self.value_at(self.anomaly_time))):
            self._check_parameter(value, t)

    def _check_parameter(self, value: float, t: int) -> None:
        if self.model == "barabasi_albert":
            if value < 0:
                raise ValueError(f"Attachment exponent at t={t} is {value:.4g}; must be nonnegative.")
        elif not 0.0 <= value <= 1.0:
            raise ValueError(f"Probability at t={t} is {value:.4g}; expected range is 0..1.")

    def base_value(self, t: int) -> float:
        return param_schedule(self.start, self.end, self.length, t)

    def value_at(self, t: int) -> float:
        """Model parameter used for snapshot ``t``, anomaly included."""
        base = self.base_value(t)
        if t != self.anomaly_time:
            return base
        return self.anomaly_offset if self.anomaly_mode == "absolute" else base + self.anomaly_offset

    def labels(self) -> np.ndarray:
        flags = np.zeros(self.length, dtype=bool)
        flags[self.anomaly_time - 1] = True
        return flags

    def manifest(self) -> dict[str, Any]:
        payload = asdict(self)
        payload["schedule"] = [self.value_at(t) for t in range(1, self.length + 1)]
        return payload


def generate_snapshot(spec: GeneratorSpec, value: float, rng: np.random.Generator) -> StaticGraph:
    if spec.model == "erdos_renyi":
        return gen_erdos_renyi(spec.node_count, value, rng)
    if spec.model == "barabasi_albert":
        return gen_barabasi_albert(spec.node_count, value, spec.edges_per_step, rng)
    return gen_watts_strogatz(spec.node_count, spec.k_ring, value, rng)


def generate_sequence(spec: GeneratorSpec, rng: np.random.Generator | None = None) -> TemporalNetworkSequence:
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    return _sequence([generate_snapshot(spec, spec.value_at(t), rng) for t in range(1, spec.length + 1)])
