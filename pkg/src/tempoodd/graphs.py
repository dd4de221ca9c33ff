"""Static graphs, temporal sequences of them, and edge-list CSV ingestion."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import networkx as nx
import numpy as np
import pandas as pd
from scipy import sparse

from .errors import GraphFormatError
from .runtime import logger

DegreeMode = Literal["in", "out", "total"]
TimeLabel = int | str


@dataclass(frozen=True)
class StaticGraph:
    node_count: int
    edges: frozenset[tuple[int, int]]
    directed: bool = False
    labels: tuple[str, ...] = field(default=(), compare=False)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def node_labels(self) -> tuple[str, ...]:
        return self.labels or tuple(str(index) for index in range(self.node_count))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def to_networkx(self) -> nx.Graph | nx.DiGraph:
        graph: nx.Graph | nx.DiGraph = nx.DiGraph() if self.directed else nx.Graph()
        graph.add_nodes_from(range(self.node_count))
        graph.add_edges_from(self.sorted_edges())
        return graph

    def adjacency(self) -> sparse.csr_array:
        """Binary adjacency matrix; symmetric for undirected graphs."""
        n = self.node_count
        if not self.edges:
            return sparse.csr_array((n, n), dtype=np.float64)
        rows, cols = np.array(self.sorted_edges(), dtype=np.int64).T
        if not self.directed:
            rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
        data = np.ones(rows.shape[0], dtype=np.float64)
        return sparse.csr_array((data, (rows, cols)), shape=(n, n))


@dataclass(frozen=True)
class TemporalNetworkSequence:
    snapshots: tuple[StaticGraph, ...]
    time_labels: tuple[TimeLabel, ...]
    directed: bool = False

    def __post_init__(self) -> None:
        if not self.snapshots:
            raise GraphFormatError("no snapshots")
        if len(self.snapshots) != len(self.time_labels):
            raise ValueError(
                f"time_labels has {len(self.time_labels)} entries but there are {len(self.snapshots)} snapshots."
            )
        if any(graph.directed != self.directed for graph in self.snapshots):
            raise ValueError("All snapshots must share the sequence's directed flag.")
        for previous, current in zip(self.time_labels, self.time_labels[1:], strict=False):
            if not previous < current:  # type: ignore[operator]
                raise ValueError(f"time_labels must be strictly increasing; got {previous!r} before {current!r}.")

    def __len__(self) -> int:
        return len(self.snapshots)


def build_graph(
    node_count: int,
    edge_list: Iterable[tuple[int, int]],
    directed: bool = False,
    *,
    labels: Sequence[str] | None = None,
) -> StaticGraph:
    """Build a simple graph: self-loops dropped, duplicates collapsed, endpoints validated."""
    if node_count < 0:
        raise ValueError(f"node_count must be nonnegative, got {node_count}.")
    if labels is not None and len(labels) != node_count:
        raise ValueError(f"Expected {node_count} node labels, got {len(labels)}.")
    edges: set[tuple[int, int]] = set()
    for raw in edge_list:
        u, v = int(raw[0]), int(raw[1])
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise GraphFormatError(f"Edge ({u}, {v}) has an endpoint out of range for {node_count} nodes.")
        if u == v:
            continue
        edges.add((u, v) if directed or u < v else (v, u))
    return StaticGraph(
        node_count=node_count,
        edges=frozenset(edges),
        directed=directed,
        labels=tuple(labels) if labels is not None else (),
    )


def degree_sequence(g: StaticGraph, mode: DegreeMode = "total") -> list[int]:
    if mode not in {"in", "out", "total"}:
        raise ValueError(f"Invalid degree mode {mode!r}. Supported values: in, out, total.")
    out_degree = np.zeros(g.node_count, dtype=np.int64)
    in_degree = np.zeros(g.node_count, dtype=np.int64)
    if g.edges:
        sources, targets = np.array(g.sorted_edges(), dtype=np.int64).T
        np.add.at(out_degree, sources, 1)
        np.add.at(in_degree, targets, 1)
    if not g.directed:
        return (out_degree + in_degree).tolist()
    if mode == "in":
        return in_degree.tolist()
    if mode == "out":
        return out_degree.tolist()
    return (out_degree + in_degree).tolist()


def _natural_sort(values: Iterable[str]) -> list[str]:
    unique = sorted(set(values))
    try:
        return sorted(unique, key=int)
    except ValueError:
        return unique


def _coerce_time_labels(raw: Sequence[str]) -> list[TimeLabel]:
    try:
        return [int(value) for value in raw]
    except ValueError:
        return list(raw)


def _read_edge_table(path: Path, required: Sequence[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as exc:
        raise GraphFormatError(f"{path}: no snapshots") from exc
    except pd.errors.ParserError as exc:
        raise GraphFormatError(f"{path}: unparseable row: {exc}") from exc
    frame.columns = [str(column).strip().lower() for column in frame.columns]
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise GraphFormatError(f"{path}: missing required column(s) {', '.join(missing)}.")
    for position, row in enumerate(frame[list(required)].itertuples(index=False)):
        for column, value in zip(required, row, strict=True):
            if pd.isna(value) or str(value).strip() == "":
                # header is line 1
                raise GraphFormatError(f"{path}: line {position + 2}: missing value for {column!r}.")
    if "weight" in frame.columns:
        weights = pd.to_numeric(frame["weight"].replace("", np.nan), errors="coerce")
        bad = np.flatnonzero(weights.isna() & (frame["weight"] != ""))
        if bad.size:
            raise GraphFormatError(f"{path}: line {int(bad[0]) + 2}: weight is not numeric.")
    return frame.assign(**{column: frame[column].str.strip() for column in required})


def _read_node_list(path: Path) -> dict[str, list[str]]:
    frame = _read_edge_table(path, ("time", "node"))
    return {str(time): list(group["node"]) for time, group in frame.groupby("time", sort=False)}


def _assemble(
    groups: list[tuple[TimeLabel, pd.DataFrame]],
    *,
    nodes: Literal["observed", "fixed"],
    directed: bool,
    declared: dict[str, list[str]],
) -> TemporalNetworkSequence:
    if not groups:
        raise GraphFormatError("no snapshots")
    universe: list[str] | None = None
    if nodes == "fixed":
        every_id = [node for _, frame in groups for node in (*frame["from"], *frame["to"])]
        every_id += [node for ids in declared.values() for node in ids]
        universe = _natural_sort(every_id)

    snapshots: list[StaticGraph] = []
    for time, frame in groups:
        ids = universe or _natural_sort([*frame["from"], *frame["to"], *declared.get(str(time), [])])
        index = {node: position for position, node in enumerate(ids)}
        edge_list = [(index[u], index[v]) for u, v in zip(frame["from"], frame["to"], strict=True)]
        snapshots.append(build_graph(len(ids), edge_list, directed, labels=ids))
    return TemporalNetworkSequence(
        snapshots=tuple(snapshots),
        time_labels=tuple(time for time, _ in groups),
        directed=directed,
    )


def load_sequence(
    source: Path | str,
    *,
    fmt: Literal["long", "dir"] | None = None,
    nodes: Literal["observed", "fixed"] = "observed",
    directed: bool = False,
    node_list: Path | str | None = None,
) -> TemporalNetworkSequence:
    """Load a long CSV (``time,from,to[,weight]``) or a directory of per-snapshot CSVs.

    ``node_list`` optionally names a ``time,node`` CSV declaring nodes that exist in a snapshot
    without touching any edge, so isolated nodes survive a write/load round trip.
    """
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"Input not found: {path}")
    resolved_fmt = fmt or ("dir" if path.is_dir() else "long")
    declared = _read_node_list(Path(node_list)) if node_list is not None else {}

    groups: list[tuple[TimeLabel, pd.DataFrame]] = []
    if resolved_fmt == "dir":
        if not path.is_dir():
            raise ValueError(f"Directory format requested but {path} is not a directory.")
        files = sorted(path.glob("*.csv"), key=lambda item: item.name)
        stems = [item.stem for item in files]
        coerced = _coerce_time_labels(stems)
        # filename order defines t; integer labels only when they agree with it
        labels = coerced if all(a < b for a, b in zip(coerced, coerced[1:], strict=False)) else list(stems)
        groups = [(label, _read_edge_table(item, ("from", "to"))) for label, item in zip(labels, files, strict=True)]
    else:
        frame = _read_edge_table(path, ("time", "from", "to"))
        raw_times = _natural_sort(frame["time"])
        for raw_time, label in zip(raw_times, _coerce_time_labels(raw_times), strict=True):
            groups.append((label, frame[frame["time"] == raw_time]))

    sequence = _assemble(groups, nodes=nodes, directed=directed, declared=declared)
    logger.info("Loaded %d snapshots from %s (%s format, %s nodes)", len(sequence), path, resolved_fmt, nodes)
    return sequence


def write_sequence(
    sequence: TemporalNetworkSequence,
    path: Path | str,
    *,
    node_list: Path | str | None = None,
) -> None:
    """Write the long CSV format read by ``load_sequence``; optionally also the node list."""
    rows: list[tuple[TimeLabel, str, str]] = []
    for time, graph in zip(sequence.time_labels, sequence.snapshots, strict=True):
        labels = graph.node_labels()
        rows.extend((time, labels[u], labels[v]) for u, v in graph.sorted_edges())
    pd.DataFrame(rows, columns=["time", "from", "to"]).to_csv(path, index=False, lineterminator="\n")
    if node_list is not None:
        node_rows = [
            (time, label)
            for time, graph in zip(sequence.time_labels, sequence.snapshots, strict=True)
            for label in graph.node_labels()
        ]
        pd.DataFrame(node_rows, columns=["time", "node"]).to_csv(node_list, index=False, lineterminator="\n")
