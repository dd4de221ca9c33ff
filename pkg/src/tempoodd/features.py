"""The 20-feature map from a static graph to a point in feature space.

Every summary of a per-node distribution uses the 99th percentile with linear interpolation
between order statistics (``h = 1 + (n - 1) q``). Entries that are meaningless for a graph
(assortativity with constant degrees, transitivity with no connected triples, ...) are
reported as undefined through the mask rather than as zero.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cached_property, partial
from pathlib import Path

import networkx as nx
import numpy as np
import pandas as pd
from scipy.sparse import csgraph

from .graphs import StaticGraph, TemporalNetworkSequence, TimeLabel, degree_sequence
from .runtime import _parallel_map, logger
from .settings import FEATURE_NAMES

TAIL_QUANTILE = 0.99
CLOSENESS_CUTOFF = 0.8
PAGERANK_DAMPING = 0.85
PAGERANK_TOL = 1e-10


def quantile(values: Sequence[float] | np.ndarray, q: float) -> float | None:
    """Linear-interpolation quantile; ``None`` for an empty input."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"Invalid value for q: {q}. Expected range is 0..1.")
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0:
        return None
    if not np.all(np.isfinite(data)):
        raise ValueError("quantile requires finite values.")
    return float(np.quantile(data, q, method="linear"))


class _GraphView:
    """Lazily computed structures shared by several features of one graph."""

    def __init__(self, g: StaticGraph) -> None:
        self.g = g

    @cached_property
    def nx_graph(self) -> nx.Graph | nx.DiGraph:
        return self.g.to_networkx()

    @cached_property
    def undirected(self) -> nx.Graph:
        graph = self.nx_graph
        return graph.to_undirected(as_view=False) if graph.is_directed() else graph

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.asarray(degree_sequence(self.g, "total"), dtype=np.float64)

    @cached_property
    def distances(self) -> np.ndarray:
        """Geodesic distances on the (possibly directed) graph; ``inf`` where unreachable."""
        if self.g.node_count == 0:
            return np.zeros((0, 0))
        return csgraph.shortest_path(self.g.adjacency(), directed=self.g.directed, unweighted=True)

    @cached_property
    def finite_offdiagonal(self) -> np.ndarray:
        d = self.distances
        off = ~np.eye(d.shape[0], dtype=bool)
        return d[off & np.isfinite(d)]

    @cached_property
    def spectral(self) -> tuple[float, float]:
        return spectral_hub_authority(self)


def _view(g: StaticGraph | _GraphView) -> _GraphView:
    return g if isinstance(g, _GraphView) else _GraphView(g)


def transitivity(g: StaticGraph | _GraphView) -> float | None:
    view = _view(g)
    undirected_degrees = np.array([d for _, d in view.undirected.degree()], dtype=np.float64)
    if float(np.sum(undirected_degrees * (undirected_degrees - 1) / 2)) == 0.0:
        return None
    return float(nx.transitivity(view.undirected))


def degree_assortativity(g: StaticGraph | _GraphView) -> float | None:
    view = _view(g)
    if view.g.edge_count == 0:
        return None
    sources, targets = np.array(view.g.sorted_edges()).T
    if view.g.directed:
        out_degree = np.asarray(degree_sequence(view.g, "out"), dtype=np.float64)
        in_degree = np.asarray(degree_sequence(view.g, "in"), dtype=np.float64)
        x, y = out_degree[sources], in_degree[targets]
    else:
        x = np.concatenate([view.degrees[sources], view.degrees[targets]])
        y = np.concatenate([view.degrees[targets], view.degrees[sources]])
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return None
    value = float(nx.degree_assortativity_coefficient(view.nx_graph))
    if not math.isfinite(value):
        return None
    return min(1.0, max(-1.0, value))


def mean_distance(g: StaticGraph | _GraphView) -> float | None:
    finite = _view(g).finite_offdiagonal
    if finite.size == 0:
        return None
    return float(finite.mean())


def diameter(g: StaticGraph | _GraphView) -> float:
    finite = _view(g).finite_offdiagonal
    return float(finite.max()) if finite.size else 0.0


def vertex_connectivity(g: StaticGraph | _GraphView) -> int:
    view = _view(g)
    if view.g.node_count < 2:
        return 0
    return int(nx.node_connectivity(view.nx_graph))


def global_efficiency(g: StaticGraph | _GraphView) -> float | None:
    view = _view(g)
    n = view.g.node_count
    if n < 2:
        return None
    return float(np.sum(1.0 / view.finite_offdiagonal) / (n * (n - 1)))


def closeness_scores(g: StaticGraph | _GraphView) -> np.ndarray:
    """Per-node closeness over outgoing reachable nodes, scaled so complete graphs score 1."""
    d = _view(g).distances
    reachable = np.isfinite(d) & (d > 0)
    counts = reachable.sum(axis=1)
    totals = np.where(reachable, d, 0.0).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(counts > 0, counts / np.where(totals > 0, totals, 1.0), 0.0)


def closeness_high_proportion(g: StaticGraph | _GraphView) -> float:
    scores = closeness_scores(g)
    if scores.size == 0:
        return 0.0
    return float(np.mean(scores >= CLOSENESS_CUTOFF - 1e-12))


def betweenness_q99(g: StaticGraph | _GraphView) -> float:
    view = _view(g)
    if view.g.node_count == 0:
        return 0.0
    values = list(nx.betweenness_centrality(view.nx_graph, normalized=False).values())
    return quantile(values, TAIL_QUANTILE) or 0.0


def pagerank_scores(g: StaticGraph | _GraphView, damping: float = PAGERANK_DAMPING) -> np.ndarray:
    if not 0.0 < damping < 1.0:
        raise ValueError(f"Invalid value for damping: {damping}. Expected range is (0, 1).")
    view = _view(g)
    ranks = nx.pagerank(view.nx_graph, alpha=damping, tol=PAGERANK_TOL, max_iter=10_000)
    return np.array([ranks[node] for node in range(view.g.node_count)], dtype=np.float64)


def pagerank_q99(g: StaticGraph | _GraphView, damping: float = PAGERANK_DAMPING) -> float | None:
    return quantile(pagerank_scores(g, damping), TAIL_QUANTILE)


def spectral_hub_authority(g: StaticGraph | _GraphView) -> tuple[float, float]:
    """Principal eigenvalues of A A^T (hub) and A^T A (authority)."""
    view = _view(g)
    if view.g.edge_count == 0:
        return 0.0, 0.0
    a = view.g.adjacency().toarray()
    hub = float(np.linalg.eigvalsh(a @ a.T)[-1])
    if not view.g.directed:
        return max(hub, 0.0), max(hub, 0.0)
    authority = float(np.linalg.eigvalsh(a.T @ a)[-1])
    return max(hub, 0.0), max(authority, 0.0)


def coreness(g: StaticGraph | _GraphView) -> np.ndarray:
    view = _view(g)
    cores = nx.core_number(view.undirected)
    return np.array([cores[node] for node in range(view.g.node_count)], dtype=np.float64)


def coreness_q99(g: StaticGraph | _GraphView) -> float:
    return quantile(coreness(g), TAIL_QUANTILE) or 0.0


def _triangle_q99(view: _GraphView) -> float | None:
    counts = nx.triangles(view.undirected)
    return quantile([counts[node] for node in range(view.g.node_count)], TAIL_QUANTILE)


def _edge_density(view: _GraphView) -> float | None:
    n = view.g.node_count
    if n < 2:
        return None
    possible = n * (n - 1) if view.g.directed else n * (n - 1) / 2
    return view.g.edge_count / possible


def _component_sizes(view: _GraphView) -> list[int]:
    graph = view.nx_graph
    components = nx.weakly_connected_components(graph) if graph.is_directed() else nx.connected_components(graph)
    return [len(component) for component in components]


def _isolated_proportion(view: _GraphView) -> float | None:
    if view.g.node_count == 0:
        return None
    return float(np.mean(view.degrees == 0))


_EXTRACTORS: dict[str, Callable[[_GraphView], float | None]] = {
    "node_count": lambda view: float(view.g.node_count),
    "triangle_q99": _triangle_q99,
    "degree_q99": lambda view: quantile(view.degrees, TAIL_QUANTILE),
    "edge_count": lambda view: float(view.g.edge_count),
    "edge_density": _edge_density,
    "transitivity": transitivity,
    "assortativity": degree_assortativity,
    "mean_distance": mean_distance,
    "diameter": diameter,
    "isolated_proportion": _isolated_proportion,
    "vertex_connectivity": lambda view: float(vertex_connectivity(view)),
    "global_efficiency": global_efficiency,
    "component_size_q99": lambda view: quantile(_component_sizes(view), TAIL_QUANTILE),
    "component_count": lambda view: float(len(_component_sizes(view))),
    "closeness_ge_080_proportion": closeness_high_proportion,
    "betweenness_q99": betweenness_q99,
    "pagerank_q99": pagerank_q99,
    "hub_eigenvalue": lambda view: view.spectral[0],
    "authority_eigenvalue": lambda view: view.spectral[1],
    "coreness_q99": coreness_q99,
}


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: tuple[float, ...]
    mask: tuple[bool, ...]

    def __getitem__(self, name: str) -> float | None:
        position = self.names.index(name)
        return None if self.mask[position] else self.values[position]

    def as_dict(self) -> dict[str, float | None]:
        return {name: self[name] for name in self.names}


def compute_features(g: StaticGraph, features: Sequence[str] = FEATURE_NAMES) -> FeatureVector:
    """Evaluate the requested features (all 20 by default) in canonical order."""
    requested = set(features)
    unknown = sorted(requested - set(FEATURE_NAMES))
    if unknown:
        raise ValueError(f"Unknown feature names: {', '.join(unknown)}.")
    names = tuple(name for name in FEATURE_NAMES if name in requested)
    view = _GraphView(g)
    values: list[float] = []
    mask: list[bool] = []
    for name in names:
        value = _EXTRACTORS[name](view)
        undefined = value is None or not math.isfinite(value)
        values.append(math.nan if undefined else float(value))  # type: ignore[arg-type]
        mask.append(undefined)
    return FeatureVector(names=names, values=tuple(values), mask=tuple(mask))


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    mask: np.ndarray
    feature_names: tuple[str, ...]
    time_labels: tuple[TimeLabel, ...]

    def __post_init__(self) -> None:
        if self.values.shape != self.mask.shape:
            raise ValueError("values and mask must have the same shape.")
        if self.values.shape != (len(self.time_labels), len(self.feature_names)):
            raise ValueError(
                f"values has shape {self.values.shape}; expected "
                f"({len(self.time_labels)}, {len(self.feature_names)})."
            )

    @property
    def length(self) -> int:
        return len(self.time_labels)

    def column(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        position = self.feature_names.index(name)
        return self.values[:, position], self.mask[:, position]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(np.where(self.mask, np.nan, self.values), columns=list(self.feature_names))
        frame.insert(0, "t", list(self.time_labels))
        return frame


def compute_feature_matrix(
    sequence: TemporalNetworkSequence,
    features: Sequence[str] = FEATURE_NAMES,
    *,
    workers: int | None = None,
) -> FeatureMatrix:
    vectors = _parallel_map(partial(compute_features, features=tuple(features)), sequence.snapshots, workers=workers)
    names = vectors[0].names
    values = np.array([vector.values for vector in vectors], dtype=np.float64).reshape(len(vectors), len(names))
    mask = np.array([vector.mask for vector in vectors], dtype=bool).reshape(len(vectors), len(names))
    logger.info("Computed %d feature rows x %d features", len(vectors), len(names))
    return FeatureMatrix(values=values, mask=mask, feature_names=names, time_labels=sequence.time_labels)


def write_feature_matrix(fm: FeatureMatrix, path: Path | str) -> None:
    """CSV with a ``t`` column and one column per feature; masked entries are empty cells."""
    fm.to_frame().to_csv(path, index=False, na_rep="", lineterminator="\n", float_format="%.17g")


def _read_time_labels(raw: Sequence[str]) -> tuple[TimeLabel, ...]:
    # integers only when every label is written the way str(int) writes it, so "001" stays text
    if all(label.lstrip("-").isdigit() and str(int(label)) == label for label in raw):
        return tuple(int(label) for label in raw)
    return tuple(raw)


def read_feature_matrix(path: Path | str) -> FeatureMatrix:
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"Feature file not found: {source}")
    frame = pd.read_csv(source, float_precision="round_trip", dtype={"t": str})
    if "t" not in frame.columns:
        raise ValueError(f"{source}: missing 't' column.")
    names = tuple(column for column in frame.columns if column != "t")
    unknown = [name for name in names if name not in FEATURE_NAMES]
    if unknown:
        raise ValueError(f"{source}: unknown feature columns {', '.join(unknown)}.")
    values = frame[list(names)].to_numpy(dtype=np.float64)
    labels = _read_time_labels(frame["t"].tolist())
    return FeatureMatrix(
        values=values,
        mask=np.isnan(values),
        feature_names=names,
        time_labels=labels,
    )
