import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapsed_kcore import (Graph, ParseError, core_decomposition, induced_subgraph, kcore,
                             min_degree, parse_edge_list)
from collapsed_kcore.datasets import BENCHMARKS, load
from collapsed_kcore.graph import min_degree_of, peel, remove_nodes

from conftest import clique, graphs, to_nx


def test_parse_skips_comments_blank_lines_and_extra_columns():
    g = parse_edge_list("# header\n% other\n\n1 2 0.5\n2 3\n3 1 7 x\n")
    assert g.n == 3 and g.m == 3
    assert g.labels == (1, 2, 3)


def test_parse_drops_loops_and_repeats():
    g = parse_edge_list("1 1\n1 2\n2 1\n1 2\n2 3\n")
    assert g.m == 2
    assert g.dropped_self_loops == 1
    assert g.dropped_duplicates == 2


def test_numeric_labels_are_sorted_numerically():
    g = parse_edge_list("10 2\n2 1\n")
    assert g.labels == (1, 2, 10)
    assert g.neighbors(1) == (0, 2)


def test_string_labels_keep_first_appearance():
    g = parse_edge_list("bob alice\nalice carol\n")
    assert g.labels == ("bob", "alice", "carol")


def test_custom_separator():
    g = parse_edge_list("a,b\nb,c\n", separator=",")
    assert g.m == 2


@pytest.mark.parametrize("text", ["", "# only a comment\n", "1\n"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_edge_list(text)


def test_parse_error_reports_line():
    with pytest.raises(ParseError, match="line 2"):
        parse_edge_list("1 2\n3\n")


def test_graph_rejects_out_of_range_edges():
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 2)])


def test_degree_is_read_only():
    g = clique(4)
    with pytest.raises(ValueError):
        g.degree[0] = 7


def test_clique_cores():
    g = clique(5)
    assert kcore(g, 4) == frozenset(range(5))
    assert kcore(g, 5) == frozenset()


def test_kcore_rejects_nonpositive_k():
    with pytest.raises(ValueError):
        kcore(clique(3), 0)


def test_triangle_with_pendant():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    assert kcore(g, 2) == {0, 1, 2}


def test_path_has_empty_2core():
    g = Graph.from_edges(5, [(i, i + 1) for i in range(4)])
    assert kcore(g, 2) == frozenset()


@given(graphs(max_n=18), st.integers(1, 6))
def test_kcore_matches_networkx(g, k):
    assert kcore(g, k) == set(nx.k_core(to_nx(g), k).nodes())


@given(graphs(max_n=18))
def test_coreness_matches_networkx(g):
    dec = core_decomposition(g)
    ref = nx.core_number(to_nx(g))
    assert [int(c) for c in dec.coreness] == [ref[v] for v in range(g.n)]
    assert sum(len(layer) for layer in dec.layers) == g.n
    for k in range(1, dec.max_coreness + 1):
        assert dec.core(k) == kcore(g, k)


@given(graphs(min_n=2, max_n=14), st.integers(1, 4), st.data())
def test_peel_on_alive_mask_equals_core_of_induced_subgraph(g, k, data):
    keep = data.draw(st.lists(st.booleans(), min_size=g.n, max_size=g.n))
    alive = np.array(keep, dtype=bool)
    mask = peel(g, k, alive)
    sub = induced_subgraph(g, np.flatnonzero(alive))
    ids = np.flatnonzero(alive)
    assert set(ids[list(kcore(sub, k))]) == set(np.flatnonzero(mask))


def test_induced_subgraph_relabels_and_keeps_labels():
    g = parse_edge_list("a b\nb c\nc a\nc d\n")
    sub = induced_subgraph(g, [3, 2, 0])
    assert sub.labels == ("a", "c", "d")
    assert sub.m == 2


def test_induced_subgraph_rejects_bad_ids():
    with pytest.raises(IndexError):
        induced_subgraph(clique(3), [0, 5])


def test_remove_nodes():
    assert remove_nodes(clique(5), [0, 1]).m == 3


def test_min_degree():
    assert min_degree(clique(4)) == 3
    assert min_degree_of(clique(4), [0, 1]) == 1
    with pytest.raises(ValueError):
        min_degree(Graph(()))


def test_karate_table_row(karate):
    n, m, rows = BENCHMARKS["karate"]
    assert (karate.n, karate.m) == (n, m)
    core = kcore(karate, 2)
    assert (len(core), induced_subgraph(karate, core).m) == rows[2]


@pytest.mark.parametrize("k", [2, 3, 4, 6])
def test_lesmis_table_rows(k):
    g = load("lesmis")
    core = kcore(g, k)
    assert (len(core), induced_subgraph(g, core).m) == BENCHMARKS["lesmis"][2][k]


def test_karate_5core_is_empty(karate):
    assert kcore(karate, 5) == frozenset()
    assert core_decomposition(karate).max_coreness == 4
