from __future__ import annotations

from pathlib import Path

import pytest

from tempoodd.errors import GraphFormatError
from tempoodd.graphs import (
    TemporalNetworkSequence,
    build_graph,
    degree_sequence,
    load_sequence,
    write_sequence,
)


def test_build_graph_collapses_undirected_duplicates() -> None:
    assert build_graph(3, [(0, 1), (1, 0)]).edge_count == 1


def test_build_graph_drops_self_loops() -> None:
    assert build_graph(3, [(0, 0), (0, 1)]).edge_count == 1


def test_build_graph_keeps_both_directions_when_directed() -> None:
    assert build_graph(3, [(0, 1), (1, 0)], directed=True).edge_count == 2


def test_build_graph_rejects_out_of_range_endpoint() -> None:
    with pytest.raises(GraphFormatError, match="endpoint out of range"):
        build_graph(2, [(0, 5)])


def test_degree_sequence_examples() -> None:
    assert degree_sequence(build_graph(3, [(0, 1), (1, 2), (0, 2)])) == [2, 2, 2]
    assert degree_sequence(build_graph(5, [(0, i) for i in range(1, 5)])) == [4, 1, 1, 1, 1]
    assert degree_sequence(build_graph(3, [])) == [0, 0, 0]


def test_degree_sequence_directed_modes_sum_to_edge_count() -> None:
    g = build_graph(4, [(0, 1), (0, 2), (3, 0)], directed=True)
    assert degree_sequence(g, "out") == [2, 0, 0, 1]
    assert degree_sequence(g, "in") == [1, 1, 1, 0]
    assert sum(degree_sequence(g, "total")) == 2 * g.edge_count


def test_sequence_rejects_empty_and_unordered() -> None:
    with pytest.raises(GraphFormatError, match="no snapshots"):
        TemporalNetworkSequence(snapshots=(), time_labels=())
    g = build_graph(2, [(0, 1)])
    with pytest.raises(ValueError, match="strictly increasing"):
        TemporalNetworkSequence(snapshots=(g, g), time_labels=(2, 1))


def test_load_long_csv_groups_by_time(tmp_path: Path) -> None:
    path = tmp_path / "edges.csv"
    path.write_text("time,from,to\n1,a,b\n1,b,c\n2,a,c\n", encoding="utf-8")
    sequence = load_sequence(path)
    assert len(sequence) == 2
    assert [g.edge_count for g in sequence.snapshots] == [2, 1]
    assert sequence.time_labels == (1, 2)
    assert sequence.snapshots[1].node_labels() == ("a", "c")


def test_load_long_csv_orders_numeric_times_naturally(tmp_path: Path) -> None:
    path = tmp_path / "edges.csv"
    path.write_text("time,from,to\n10,a,b\n9,a,b\n100,b,c\n", encoding="utf-8")
    assert load_sequence(path).time_labels == (9, 10, 100)


def test_load_long_csv_accepts_and_ignores_weights(tmp_path: Path) -> None:
    path = tmp_path / "edges.csv"
    path.write_text("time,from,to,weight\n1,a,b,2.5\n1,b,c,1\n", encoding="utf-8")
    assert load_sequence(path).snapshots[0].edge_count == 2


def test_load_long_csv_reports_missing_target_line(tmp_path: Path) -> None:
    path = tmp_path / "edges.csv"
    path.write_text("time,from,to\n1,a,b\n1,a\n", encoding="utf-8")
    with pytest.raises(GraphFormatError, match="line 3"):
        load_sequence(path)


def test_load_empty_file_reports_no_snapshots(tmp_path: Path) -> None:
    path = tmp_path / "edges.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(GraphFormatError, match="no snapshots"):
        load_sequence(path)


def test_load_missing_source_raises_file_not_found(tmp_path: Path) -> None:
    with pytest.raises(FileNotFoundError):
        load_sequence(tmp_path / "missing.csv")


def test_load_directory_uses_filename_order(tmp_path: Path) -> None:
    (tmp_path / "002.csv").write_text("from,to\na,b\n", encoding="utf-8")
    (tmp_path / "001.csv").write_text("from,to\na,b\nb,c\n", encoding="utf-8")
    sequence = load_sequence(tmp_path, fmt="dir")
    assert sequence.time_labels == (1, 2)
    assert [g.edge_count for g in sequence.snapshots] == [2, 1]


def test_load_fixed_universe_shares_nodes(tmp_path: Path) -> None:
    path = tmp_path / "edges.csv"
    path.write_text("time,from,to\n1,a,b\n2,c,d\n", encoding="utf-8")
    sequence = load_sequence(path, nodes="fixed")
    assert [g.node_count for g in sequence.snapshots] == [4, 4]
    assert sequence.snapshots[0].node_labels() == ("a", "b", "c", "d")


def test_load_directed_keeps_orientation(tmp_path: Path) -> None:
    path = tmp_path / "edges.csv"
    path.write_text("time,from,to\n1,a,b\n1,b,a\n", encoding="utf-8")
    sequence = load_sequence(path, directed=True)
    assert sequence.directed
    assert sequence.snapshots[0].edge_count == 2


def test_string_time_labels_survive(tmp_path: Path) -> None:
    path = tmp_path / "edges.csv"
    path.write_text("time,from,to\n2011-05-02,a,b\n2015-10-19,a,c\n", encoding="utf-8")
    assert load_sequence(path).time_labels == ("2011-05-02", "2015-10-19")


def test_write_then_load_preserves_isolated_nodes_with_node_list(tmp_path: Path) -> None:
    sequence = TemporalNetworkSequence(
        snapshots=(build_graph(4, [(0, 1)]), build_graph(3, [(1, 2), (0, 2)])),
        time_labels=(1, 2),
    )
    edges, nodes = tmp_path / "edges.csv", tmp_path / "nodes.csv"
    write_sequence(sequence, edges, node_list=nodes)
    loaded = load_sequence(edges, node_list=nodes)
    assert [g.node_count for g in loaded.snapshots] == [4, 3]
    assert [g.edge_count for g in loaded.snapshots] == [1, 2]
    assert loaded.time_labels == (1, 2)
