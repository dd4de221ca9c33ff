from __future__ import annotations

import itertools
import math
from collections import deque
from pathlib import Path

import numpy as np
import pytest

from tempoodd.features import (
    FeatureMatrix,
    betweenness_q99,
    closeness_high_proportion,
    compute_feature_matrix,
    compute_features,
    coreness_q99,
    degree_assortativity,
    diameter,
    global_efficiency,
    mean_distance,
    pagerank_q99,
    pagerank_scores,
    quantile,
    read_feature_matrix,
    spectral_hub_authority,
    transitivity,
    vertex_connectivity,
    write_feature_matrix,
)
from tempoodd.graphs import TemporalNetworkSequence, build_graph
from tempoodd.settings import FEATURE_NAMES


def _complete(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def _path(n: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(n - 1)]


def _ring(n: int) -> list[tuple[int, int]]:
    return [(i, (i + 1) % n) for i in range(n)]


def _star(leaves: int) -> list[tuple[int, int]]:
    return [(0, i) for i in range(1, leaves + 1)]


# Brute-force reference implementations on adjacency sets.


def _hand_quantile(values: list[float], q: float) -> float | None:
    if not values:
        return None
    ordered = sorted(values)
    h = 1 + (len(ordered) - 1) * q
    low = math.floor(h)
    if low >= len(ordered):
        return float(ordered[-1])
    return ordered[low - 1] + (h - low) * (ordered[low] - ordered[low - 1])


def _adjacency(n: int, edges: list[tuple[int, int]]) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def _bfs(adj: list[set[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for other in adj[node]:
            if other not in dist:
                dist[other] = dist[node] + 1
                queue.append(other)
    return dist


def _connected(adj: list[set[int]], alive: set[int]) -> bool:
    if len(alive) <= 1:
        return True
    start = next(iter(alive))
    seen = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for other in adj[node] & alive:
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return seen == alive


def _oracle(n: int, edges: list[tuple[int, int]]) -> dict[str, float | None]:
    adj = _adjacency(n, edges)
    degrees = [len(neighbours) for neighbours in adj]
    m = len(edges)
    triangles = [
        sum(1 for a, b in itertools.combinations(sorted(adj[v]), 2) if b in adj[a]) for v in range(n)
    ]
    triples = sum(d * (d - 1) / 2 for d in degrees)
    dist = [_bfs(adj, v) for v in range(n)]
    finite = [dist[u][v] for u in range(n) for v in dist[u] if v != u]

    ends = [(degrees[u], degrees[v]) for u, v in edges] + [(degrees[v], degrees[u]) for u, v in edges]
    assortativity: float | None = None
    if ends:
        xs = [x for x, _ in ends]
        ys = [y for _, y in ends]
        if max(xs) != min(xs) and max(ys) != min(ys):
            mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
            cov = sum((x - mx) * (y - my) for x, y in ends)
            sx = math.sqrt(sum((x - mx) ** 2 for x in xs))
            sy = math.sqrt(sum((y - my) ** 2 for y in ys))
            assortativity = cov / (sx * sy)

    if n < 2:
        connectivity = 0
    elif m == n * (n - 1) // 2:
        connectivity = n - 1
    else:
        connectivity = next(
            size
            for size in range(n)
            for removed in itertools.combinations(range(n), size)
            if not _connected(adj, set(range(n)) - set(removed))
        )

    closeness = []
    for v in range(n):
        reach = [d for u, d in dist[v].items() if u != v]
        closeness.append(len(reach) / sum(reach) if reach else 0.0)

    sigma = [[0] * n for _ in range(n)]
    for s in range(n):
        sigma[s][s] = 1
        for node in sorted(dist[s], key=dist[s].get):
            for other in adj[node]:
                if dist[s].get(other) == dist[s][node] + 1:
                    sigma[s][other] += sigma[s][node]
    betweenness = [0.0] * n
    for s, t in itertools.combinations(range(n), 2):
        if t not in dist[s]:
            continue
        for v in range(n):
            if v in (s, t) or v not in dist[s] or t not in dist[v]:
                continue
            if dist[s][v] + dist[v][t] == dist[s][t]:
                betweenness[v] += sigma[s][v] * sigma[v][t] / sigma[s][t]

    remaining = set(range(n))
    core = [0] * n
    k = 0
    while remaining:
        current = {v: len(adj[v] & remaining) for v in remaining}
        v = min(current, key=lambda node: (current[node], node))
        k = max(k, current[v])
        core[v] = k
        remaining.remove(v)

    seen: set[int] = set()
    sizes = []
    for v in range(n):
        if v not in seen:
            seen |= set(dist[v])
            sizes.append(len(dist[v]))

    a = np.zeros((n, n))
    for u, v in edges:
        a[u, v] = a[v, u] = 1
    spectral = float(max(abs(np.linalg.eigvals(a))) ** 2) if m else 0.0

    return {
        "node_count": float(n),
        "triangle_q99": _hand_quantile(triangles, 0.99),
        "degree_q99": _hand_quantile(degrees, 0.99),
        "edge_count": float(m),
        "edge_density": m / (n * (n - 1) / 2) if n >= 2 else None,
        "transitivity": 3 * sum(triangles) / 3 / triples if triples else None,
        "assortativity": assortativity,
        "mean_distance": sum(finite) / len(finite) if finite else None,
        "diameter": float(max(finite)) if finite else 0.0,
        "isolated_proportion": degrees.count(0) / n if n else None,
        "vertex_connectivity": float(connectivity),
        "global_efficiency": sum(1 / d for d in finite) / (n * (n - 1)) if n >= 2 else None,
        "component_size_q99": _hand_quantile(sizes, 0.99),
        "component_count": float(len(sizes)),
        "closeness_ge_080_proportion": sum(score >= 0.8 - 1e-12 for score in closeness) / n if n else 0.0,
        "betweenness_q99": _hand_quantile(betweenness, 0.99) or 0.0,
        "hub_eigenvalue": spectral,
        "authority_eigenvalue": spectral,
        "coreness_q99": _hand_quantile(core, 0.99) or 0.0,
    }


def _all_graphs(n: int) -> list[list[tuple[int, int]]]:
    pairs = _complete(n)
    return [
        [pair for pair, keep in zip(pairs, mask, strict=True) if keep]
        for mask in itertools.product((False, True), repeat=len(pairs))
    ]


def _assert_matches_oracle(n: int, edges: list[tuple[int, int]]) -> None:
    vector = compute_features(build_graph(n, edges))
    expected = _oracle(n, edges)
    for name, value in expected.items():
        actual = vector[name]
        if value is None:
            assert actual is None, (n, edges, name, actual)
        else:
            assert actual == pytest.approx(value, abs=1e-8), (n, edges, name, actual, value)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_features_match_brute_force_on_every_small_graph(n: int) -> None:
    for edges in _all_graphs(n):
        _assert_matches_oracle(n, edges)


@pytest.mark.slow
def test_features_match_brute_force_on_every_six_node_graph() -> None:
    for edges in _all_graphs(6):
        _assert_matches_oracle(6, edges)


def test_pagerank_matches_dense_power_iteration_on_small_graphs() -> None:
    for edges in _all_graphs(4)[::7]:
        g = build_graph(4, edges)
        a = np.zeros((4, 4))
        for u, v in edges:
            a[u, v] = a[v, u] = 1
        rank = np.full(4, 0.25)
        for _ in range(2000):
            out = a.sum(axis=1)
            spread = np.where(out[:, None] > 0, a / np.where(out[:, None] > 0, out[:, None], 1), 0.25)
            rank = 0.15 / 4 + 0.85 * rank @ spread
        assert pagerank_scores(g) == pytest.approx(rank, abs=1e-8)


def test_quantile_interpolation_cases() -> None:
    assert quantile(list(range(1, 101)), 0.99) == pytest.approx(99.01)
    assert quantile([5, 5, 5], 0.99) == 5
    assert quantile([0, 10], 0.5) == 5
    assert quantile([], 0.5) is None
    rng = np.random.default_rng(7)
    for size in range(1, 21):
        values = rng.normal(size=size).tolist()
        q = float(rng.uniform())
        assert quantile(values, q) == pytest.approx(_hand_quantile(values, q))


def test_quantile_is_monotone_in_q() -> None:
    values = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]
    results = [quantile(values, q) for q in np.linspace(0, 1, 41)]
    assert all(a <= b for a, b in zip(results, results[1:], strict=False))


def test_transitivity_examples() -> None:
    assert transitivity(build_graph(3, _complete(3))) == 1
    assert transitivity(build_graph(3, _path(3))) == 0
    k4_minus_edge = [edge for edge in _complete(4) if edge != (0, 1)]
    assert transitivity(build_graph(4, k4_minus_edge)) == pytest.approx(0.75)
    assert transitivity(build_graph(3, [])) is None


def test_assortativity_examples() -> None:
    assert degree_assortativity(build_graph(5, _star(4))) == pytest.approx(-1.0)
    assert degree_assortativity(build_graph(6, _ring(6))) is None
    assert degree_assortativity(build_graph(4, _path(4))) == pytest.approx(-0.5)


def test_distance_features() -> None:
    assert mean_distance(build_graph(3, _complete(3))) == 1
    assert mean_distance(build_graph(3, _path(3))) == pytest.approx(4 / 3)
    assert mean_distance(build_graph(3, [(0, 1)])) == 1
    assert diameter(build_graph(5, _complete(5))) == 1
    assert diameter(build_graph(6, _ring(6))) == 3
    assert diameter(build_graph(1, [])) == 0
    assert global_efficiency(build_graph(3, _path(3))) == pytest.approx(5 / 6)
    assert global_efficiency(build_graph(2, [])) == 0


def test_connectivity_examples() -> None:
    assert vertex_connectivity(build_graph(4, [(0, 1), (2, 3)])) == 0
    assert vertex_connectivity(build_graph(4, _complete(4))) == 3
    assert vertex_connectivity(build_graph(4, _path(4))) == 1


def test_closeness_examples() -> None:
    assert closeness_high_proportion(build_graph(4, _complete(4))) == 1
    assert closeness_high_proportion(build_graph(5, _path(5))) == 0
    assert closeness_high_proportion(build_graph(5, _star(4))) == pytest.approx(0.2)


def test_betweenness_examples() -> None:
    assert betweenness_q99(build_graph(5, _star(4))) == pytest.approx(5.76)
    assert betweenness_q99(build_graph(4, _complete(4))) == 0
    assert betweenness_q99(build_graph(3, _path(3))) == pytest.approx(0.98)


def test_pagerank_examples() -> None:
    assert pagerank_q99(build_graph(7, _ring(7))) == pytest.approx(1 / 7)
    assert pagerank_q99(build_graph(4, [])) == pytest.approx(0.25)
    ranks = pagerank_scores(build_graph(3, [(0, 1), (1, 2)], directed=True))
    assert ranks[0] < ranks[1] < ranks[2]
    assert ranks.sum() == pytest.approx(1.0)


def test_spectral_examples() -> None:
    assert spectral_hub_authority(build_graph(2, [(0, 1)])) == pytest.approx((1.0, 1.0))
    assert spectral_hub_authority(build_graph(5, _star(4))) == pytest.approx((4.0, 4.0))
    assert spectral_hub_authority(build_graph(3, [])) == (0.0, 0.0)


def test_directed_hub_and_authority_equal_top_singular_value_squared() -> None:
    out_star = build_graph(4, [(0, 1), (0, 2), (0, 3), (1, 2)], directed=True)
    hub, authority = spectral_hub_authority(out_star)
    assert hub == pytest.approx(2 + math.sqrt(2))
    assert authority == pytest.approx(hub)


def test_coreness_examples() -> None:
    assert coreness_q99(build_graph(4, _complete(4))) == 3
    assert coreness_q99(build_graph(5, _star(4))) == 1
    assert coreness_q99(build_graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)])) == pytest.approx(
        _hand_quantile([2, 2, 2, 1], 0.99)
    )


def test_compute_features_examples() -> None:
    empty = compute_features(build_graph(5, []))
    assert empty["edge_density"] == 0
    assert empty["isolated_proportion"] == 1
    assert empty["component_count"] == 5
    assert empty["transitivity"] is None

    k5 = compute_features(build_graph(5, _complete(5)))
    assert k5["edge_density"] == 1
    assert k5["transitivity"] == 1
    assert k5["diameter"] == 1
    assert k5["coreness_q99"] == 4
    assert k5.names == FEATURE_NAMES


def test_star_snapshot_separates_from_random_edge_peers() -> None:
    rng = np.random.default_rng(3)
    n = 110
    pairs = _complete(n)
    peers = []
    for _ in range(5):
        chosen = rng.choice(len(pairs), size=100, replace=False)
        peers.append(compute_features(build_graph(n, [pairs[i] for i in chosen])))
    star = compute_features(build_graph(n, _star(100)))
    for peer in peers:
        assert star["hub_eigenvalue"] > 3 * peer["hub_eigenvalue"]
        assert star["edge_count"] == peer["edge_count"]


def test_features_invariant_under_relabelling() -> None:
    rng = np.random.default_rng(11)
    edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (5, 6)]
    permutation = rng.permutation(7)
    relabelled = [(int(permutation[u]), int(permutation[v])) for u, v in edges]
    original = compute_features(build_graph(7, edges))
    shuffled = compute_features(build_graph(7, relabelled))
    for name in FEATURE_NAMES:
        if original[name] is None:
            assert shuffled[name] is None
        else:
            assert shuffled[name] == pytest.approx(original[name], abs=1e-9)


def test_compute_features_subset_keeps_canonical_order() -> None:
    vector = compute_features(build_graph(3, _path(3)), ["node_count", "edge_count"])
    assert vector.names == ("node_count", "edge_count")
    assert vector.as_dict() == {"node_count": 3.0, "edge_count": 2.0}


def test_compute_features_rejects_unknown_name() -> None:
    with pytest.raises(ValueError, match="Unknown feature names"):
        compute_features(build_graph(3, []), ["edges"])


def test_feature_matrix_round_trip_keeps_mask(tmp_path: Path) -> None:
    sequence = TemporalNetworkSequence(
        snapshots=(build_graph(3, []), build_graph(3, _complete(3)), build_graph(4, _path(4))),
        time_labels=(1, 2, 3),
    )
    fm = compute_feature_matrix(sequence, workers=1)
    assert fm.values.shape == (3, 20)
    assert fm.mask[0, FEATURE_NAMES.index("transitivity")]

    path = tmp_path / "features.csv"
    write_feature_matrix(fm, path)
    loaded = read_feature_matrix(path)
    assert loaded.feature_names == fm.feature_names
    assert loaded.time_labels == (1, 2, 3)
    assert np.array_equal(loaded.mask, fm.mask)
    assert np.array_equal(loaded.values[~loaded.mask], fm.values[~fm.mask])


def test_directed_chain_features() -> None:
    features = compute_features(build_graph(3, [(0, 1), (1, 2)], directed=True))
    assert features["edge_count"] == 2
    assert features["edge_density"] == pytest.approx(1 / 3)
    assert features["degree_q99"] == pytest.approx(1.98)
    assert features["mean_distance"] == pytest.approx(4 / 3)
    assert features["diameter"] == 2
    assert features["global_efficiency"] == pytest.approx(2.5 / 6)
    assert features["vertex_connectivity"] == 0
    assert features["component_count"] == 1
    assert features["closeness_ge_080_proportion"] == pytest.approx(1 / 3)
    assert features["hub_eigenvalue"] == pytest.approx(1.0)
    assert features["authority_eigenvalue"] == pytest.approx(1.0)
    assert features["coreness_q99"] == 1


def test_directed_cycle_features() -> None:
    features = compute_features(build_graph(3, [(0, 1), (1, 2), (2, 0)], directed=True))
    assert features["edge_density"] == pytest.approx(0.5)
    assert features["mean_distance"] == pytest.approx(1.5)
    assert features["diameter"] == 2
    assert features["global_efficiency"] == pytest.approx(0.75)
    assert features["vertex_connectivity"] == 1
    assert features["closeness_ge_080_proportion"] == 0
    assert features["transitivity"] == 1
    assert features["coreness_q99"] == 2


def test_directed_coreness_collapses_reciprocal_arcs() -> None:
    graph = build_graph(3, [(0, 1), (1, 0), (1, 2)], directed=True)
    assert graph.edge_count == 3
    assert coreness_q99(graph) == 1


def test_feature_matrix_keeps_padded_time_labels_as_text(tmp_path: Path) -> None:
    sequence = TemporalNetworkSequence(
        snapshots=(build_graph(3, _path(3)), build_graph(3, _complete(3))),
        time_labels=("001", "002"),
    )
    path = tmp_path / "features.csv"
    write_feature_matrix(compute_feature_matrix(sequence, workers=1), path)
    assert read_feature_matrix(path).time_labels == ("001", "002")


def test_feature_matrix_round_trip_is_exact(tmp_path: Path) -> None:
    rng = np.random.default_rng(15)
    values = rng.normal(size=(50, 2)) / 3.0
    fm = FeatureMatrix(
        values=values,
        mask=np.zeros_like(values, dtype=bool),
        feature_names=("node_count", "edge_count"),
        time_labels=tuple(range(1, 51)),
    )
    path = tmp_path / "features.csv"
    write_feature_matrix(fm, path)
    assert read_feature_matrix(path).values.tolist() == values.tolist()
