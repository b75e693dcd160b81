import io
import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dbkclique.graph import (
    DimacsParseError,
    Graph,
    density,
    edge_kcore,
    format_dimacs,
    gnp_generate,
    neighborhood_subgraph,
    parse_dimacs,
    read_dimacs,
    remove_vertex,
    vertex_kcore,
    write_dimacs,
)
from oracles import DATA, maximum_cliques_oracle, omega_oracle, path, random_graph, star, triangle_pendant


@st.composite
def graphs(draw, max_n=20):
    n = draw(st.integers(0, max_n))
    p = draw(st.floats(0.0, 1.0))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_graph(np.random.default_rng(seed), n, p)


def edge_set(g: Graph) -> set:
    return {(int(g.labels[u]), int(g.labels[v])) for u, v in g.edges()}


# -- Graph type ---------------------------------------------------------------


def test_graph_rejects_asymmetric_and_loops():
    a = np.zeros((3, 3), dtype=bool)
    a[0, 1] = True
    with pytest.raises(ValueError):
        Graph(a, [1, 2, 3])
    with pytest.raises(ValueError):
        Graph(np.eye(2, dtype=bool), [1, 2])
    with pytest.raises(ValueError):
        Graph(np.zeros((2, 2), dtype=bool), [1])


def test_graph_is_immutable():
    g = Graph.complete(3)
    with pytest.raises(ValueError):
        g.adj[0, 1] = False
    with pytest.raises(ValueError):
        g.labels[0] = 7


def test_bit_rows_match_adjacency():
    g = gnp_generate(130, 0.4, 3)
    for u in (0, 64, 129):
        for v in (1, 63, 128):
            assert g.common_neighbors(u, v) == int(np.sum(g.adj[u] & g.adj[v]))


# -- DIMACS -------------------------------------------------------------------


def test_parse_triangle():
    g = parse_dimacs("p edge 3 3\ne 1 2\ne 1 3\ne 2 3\n")
    assert (g.n, g.m) == (3, 3)
    assert list(g.labels) == [1, 2, 3]


def test_parse_accepts_bytes_streams_and_comments():
    text = "c hello\n\np edge 3 2\nc mid\ne 1 2\ne 2 3\n"
    for src in (text.encode(), io.StringIO(text), io.BytesIO(text.encode())):
        g = parse_dimacs(src)
        assert (g.n, g.m) == (3, 2)


def test_parse_collapses_duplicates():
    g = parse_dimacs("p edge 3 4\ne 1 2\ne 2 1\ne 1 2\ne 2 3\n")
    assert g.m == 2


def test_parse_keller4():
    g = read_dimacs(os.path.join(DATA, "dimacs", "keller4.clq"))
    assert (g.n, g.m) == (171, 9435)


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("p edge 2 1\ne 1 1\n", 2),  # self-loop
        ("c x\np edge 3 1\ne 1 4\n", 3),  # out of range
        ("p edge 3 1\ne 0 2\n", 2),
        ("p edge 3 1\ne 1 x\n", 2),
        ("e 1 2\n", 1),  # edge before p line
    ],
)
def test_parse_errors_name_the_line(text, lineno):
    with pytest.raises(DimacsParseError) as info:
        parse_dimacs(text)
    assert info.value.lineno == lineno
    assert f"line {lineno}" in str(info.value)


def test_parse_missing_p_line():
    with pytest.raises(DimacsParseError):
        parse_dimacs("c only a comment\n")


def test_format_is_sorted_and_one_based():
    g = Graph.from_edges(4, [(3, 1), (0, 2), (1, 0)])
    assert format_dimacs(g) == "p edge 4 3\ne 1 2\ne 1 3\ne 2 4\n"


@given(graphs())
def test_dimacs_round_trip(g):
    g = g.relabeled()
    h = parse_dimacs(format_dimacs(g, ["round trip"]))
    assert h.n == g.n
    assert edge_set(h) == edge_set(g)


def test_write_dimacs_to_path_and_stream(tmp_path):
    g = gnp_generate(12, 0.5, 1)
    write_dimacs(g, tmp_path / "g.clq")
    buf = io.StringIO()
    write_dimacs(g, buf)
    assert (tmp_path / "g.clq").read_text() == buf.getvalue()


# -- G(n, p) --------------------------------------------------------------------


def test_gnp_extremes():
    assert gnp_generate(5, 0.0, 123).m == 0
    k5 = gnp_generate(5, 1.0, 123)
    assert k5.m == 10


def test_gnp_rejects_bad_p():
    for p in (-0.1, 1.5):
        with pytest.raises(ValueError):
            gnp_generate(5, p, 0)


def test_gnp_deterministic():
    a, b = gnp_generate(40, 0.3, 99), gnp_generate(40, 0.3, 99)
    assert np.array_equal(a.adj, b.adj)
    assert not np.array_equal(a.adj, gnp_generate(40, 0.3, 100).adj)


def test_gnp_stream_is_pinned():
    # regression fixture: the documented PCG64 row-major stream for seed 7
    g = gnp_generate(6, 0.5, 7)
    rng = np.random.Generator(np.random.PCG64(7))
    u = rng.random(15)
    expected = {(i, j) for k, (i, j) in enumerate(zip(*np.triu_indices(6, 1))) if u[k] < 0.5}
    assert {tuple(e) for e in g.edges().tolist()} == expected


def test_gnp_mean_edge_count():
    counts = np.array([gnp_generate(80, 0.5, s).m for s in range(1000)])
    sigma = math.sqrt(3160 * 0.25)
    assert abs(counts.mean() - 1580) <= 3 * sigma
    # the sample mean itself has standard error sigma / sqrt(1000)
    assert abs(counts.mean() - 1580) <= 3 * sigma / math.sqrt(1000)


# -- subgraphs ------------------------------------------------------------------


def test_neighborhood_examples():
    g = neighborhood_subgraph(star(4), 0)
    assert (g.n, g.m) == (4, 0)
    k4 = neighborhood_subgraph(Graph.complete(5), 2)
    assert (k4.n, k4.m) == (4, 6)
    h = neighborhood_subgraph(triangle_pendant(), 0)
    assert sorted(h.labels) == [2, 3, 4]
    assert edge_set(h) == {(2, 3)}


def test_remove_vertex_examples():
    g = remove_vertex(Graph.complete(3), 1)
    assert (g.n, g.m) == (2, 1)
    assert remove_vertex(Graph.complete(5), 0).m == 6
    h = remove_vertex(path(3), 1)
    assert (h.n, h.m) == (2, 0)
    assert list(h.labels) == [1, 3]


@given(graphs(), st.data())
def test_neighborhood_size_is_degree(g, data):
    if g.n == 0:
        return
    v = data.draw(st.integers(0, g.n - 1))
    h = neighborhood_subgraph(g, v)
    assert h.n == g.degrees[v]
    # labels compose: every edge of h is an edge of g
    for a, b in h.edges():
        assert g.adj[g.index_of([h.labels[a]])[0], g.index_of([h.labels[b]])[0]]


# -- k-cores ----------------------------------------------------------------------


def test_vertex_kcore_examples():
    g = triangle_pendant()
    assert list(vertex_kcore(g, 0)) == [0, 1, 2, 3]
    assert list(vertex_kcore(g, 2)) == [0, 1, 2]
    assert len(vertex_kcore(Graph.complete(5), 5)) == 0


@given(graphs(), st.integers(0, 10), st.integers(0, 10))
def test_vertex_kcore_monotone(g, k1, k2):
    k1, k2 = sorted((k1, k2))
    assert set(vertex_kcore(g, k2)) <= set(vertex_kcore(g, k1))


@given(graphs(), st.integers(0, 8))
def test_vertex_kcore_keeps_large_cliques(g, k):
    core = set(vertex_kcore(g, k).tolist())
    for c in maximum_cliques_oracle(g):
        if len(c) >= k + 1:
            assert c <= core


@given(graphs())
def test_vertex_kcore_degree_condition(g):
    for k in range(0, 6):
        core = vertex_kcore(g, k)
        sub = g.induced(core)
        assert sub.n == 0 or sub.degrees.min() >= k


def test_edge_kcore_examples():
    k5 = Graph.complete(5)
    assert edge_kcore(k5, 4).m == 10
    tp = edge_kcore(triangle_pendant(), 3)
    assert (tp.n, tp.m) == (4, 0)
    assert edge_kcore(Graph.empty(6), 5).m == 0


def test_edge_kcore_compat_threshold():
    # triangle + pendant at L=3: compat threshold L-2 = 1 keeps the triangle
    tp = edge_kcore(triangle_pendant(), 3, compat=True)
    assert edge_set(tp) == {(1, 2), (1, 3), (2, 3)}


@given(graphs(), st.integers(2, 8))
def test_edge_kcore_preserves_omega(g, L):
    w = omega_oracle(g)
    reduced = edge_kcore(g, L)
    assert reduced.n == g.n
    assert edge_set(reduced) <= edge_set(g)
    if w >= L + 1:
        assert omega_oracle(reduced) == w


@given(graphs(), st.integers(2, 8))
def test_edge_kcore_is_a_fixpoint(g, L):
    reduced = edge_kcore(g, L)
    for u, v in reduced.edges():
        assert reduced.common_neighbors(u, v) >= L - 1


# -- density ------------------------------------------------------------------------


def test_density_examples():
    assert density(Graph.complete(4)) == 1.0
    assert density(Graph.empty(10)) == 0.0
    assert density(Graph.empty(1)) == 0.0
    # a graph with the size of p-hat500-1: 500 vertices, 4459 edges
    iu, ju = np.triu_indices(500, 1)
    g = Graph.from_edges(500, zip(iu[:4459], ju[:4459]))
    assert g.m == 4459
    assert density(g) == pytest.approx(0.03575, abs=1e-5)
