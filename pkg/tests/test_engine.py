import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dbkclique.engine import (
    LOWER_BOUNDS,
    REDUCTIONS,
    STRATEGIES,
    UPPER_BOUNDS,
    BackendError,
    CliqueVerificationError,
    Incumbent,
    SolverConfig,
    dbk_solve,
    decompose,
    incumbent_update,
    select_vertex,
    split,
)
from dbkclique.graph import Graph, gnp_generate
from dbkclique.instances import build
from dbkclique import kernels
from oracles import omega_oracle, random_graph, star, triangle_pendant


def labels_of(g: Graph) -> list[int]:
    return sorted(int(x) for x in g.labels)


# -- configuration ----------------------------------------------------------------


def test_config_defaults():
    cfg = SolverConfig()
    assert cfg.max_leaf_size == 46
    assert cfg.lovasz_cutoff == 60
    assert cfg.dense_threshold == 0.8
    assert cfg.backend == "emulated-annealer"


@pytest.mark.parametrize(
    "kw",
    [
        {"max_leaf_size": 0},
        {"dense_threshold": 1.5},
        {"strategy": "smallest"},
        {"upper_bounds": {"chromatic"}},
        {"reductions": {"magic"}},
        {"backend": "qpu"},
        {"workers": 0},
    ],
)
def test_config_rejects_bad_values(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_config_presets():
    base = SolverConfig.baseline()
    assert base.upper_bounds == frozenset() and base.lower_bounds == frozenset()
    assert base.reductions == {"edge-kcore"}
    full = SolverConfig.full()
    assert full.upper_bounds == UPPER_BOUNDS and full.lower_bounds == LOWER_BOUNDS and full.reductions == REDUCTIONS


# -- vertex selection -----------------------------------------------------------------


def test_select_vertex_examples():
    s = star(4)
    for seed in range(10):
        assert select_vertex(s, "lowest-degree", seed) in {1, 2, 3, 4}
        assert select_vertex(s, "highest-degree", seed) == 0
        assert select_vertex(triangle_pendant(), "kcore-removal", seed) == 3


def test_select_vertex_ties_are_random_but_seeded():
    s = star(6)
    picks = {select_vertex(s, "lowest-degree", seed) for seed in range(50)}
    assert len(picks) > 1
    assert select_vertex(s, "lowest-degree", 5) == select_vertex(s, "lowest-degree", 5)


def test_median_degree_is_ceil_half_order_statistic():
    # degrees: path 0-1-2-3 plus isolated 4 -> sorted (0, 1, 1, 2, 2); ceil(5/2) = 3rd -> 1
    g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3)])
    for seed in range(10):
        assert g.degrees[select_vertex(g, "median-degree", seed)] == 1
    # even n: star K1,3 degrees (1, 1, 1, 3); 2nd order statistic -> 1
    assert select_vertex(star(3), "median-degree", 0) != 0


def test_sparsest_gv_prefers_sparse_neighbourhood():
    # vertices 0 and 5 both have the lowest degree (2); 0's neighbours are adjacent, 5's are not
    g = Graph.from_edges(6, [(0, 1), (0, 2), (1, 2), (5, 3), (5, 4), (1, 3), (2, 4), (3, 1), (4, 1), (3, 2)])
    assert g.degrees[0] == g.degrees[5] == 2
    assert select_vertex(g, "lowest-degree-sparsest-Gv", 0) == 5


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_select_vertex_rejects_empty(strategy):
    with pytest.raises(ValueError):
        select_vertex(Graph.empty(0), strategy, 0)


# -- split --------------------------------------------------------------------------------


def test_split_examples():
    gv, gp = split(Graph.complete(5), 2)
    assert (gv.n, gv.m, gp.n, gp.m) == (4, 6, 4, 6)
    gv, gp = split(triangle_pendant(), 3)
    assert (gv.n, gp.n, gp.m) == (1, 3, 3)
    assert max(omega_oracle(gv) + 1, omega_oracle(gp)) == 3
    gv, gp = split(Graph.complete(2), 0)
    assert (gv.n, gp.n) == (1, 1)


@given(st.integers(1, 14), st.floats(0, 1), st.integers(0, 2**32 - 1), st.data())
def test_split_identity(n, p, seed, data):
    g = random_graph(np.random.default_rng(seed), n, p)
    v = data.draw(st.integers(0, n - 1))
    gv, gp = split(g, v)
    assert omega_oracle(g) == max(omega_oracle(gv) + 1, omega_oracle(gp))


# -- incumbent --------------------------------------------------------------------------


def test_incumbent_update_examples():
    g = Graph.complete(6)
    three = Incumbent((1, 2, 3))
    five = incumbent_update(three, (1, 2, 3, 4, 5), g)
    assert five.size == 5
    assert incumbent_update(five, (1, 2, 3), g) is five
    with pytest.raises(CliqueVerificationError):
        incumbent_update(Incumbent((1, 2, 3, 4)), (1, 2), Graph.empty(6))


# -- dbk_solve ----------------------------------------------------------------------------


def test_triangle_single_leaf():
    r = dbk_solve(Graph.complete(3))
    assert r.omega == 3 and sorted(r.clique) == [1, 2, 3]
    assert r.subgraphs_generated == 0 and r.leaves_solved == 1
    assert r.charged_tts_seconds == 0.137


def test_hamming6_2():
    r = dbk_solve(build("hamming6-2"))
    assert r.omega == 32


def test_empty_and_tiny_graphs():
    assert dbk_solve(Graph.empty(0)).omega == 0
    assert dbk_solve(Graph.empty(5), SolverConfig(max_leaf_size=2)).omega == 1


def test_exact_backend_panel():
    for s in range(20):
        g = gnp_generate(30, 0.5, s)
        r = dbk_solve(g, SolverConfig(backend="exact", max_leaf_size=10))
        assert r.omega == omega_oracle(g)


def _panel(count=12, seed=3):
    rng = np.random.default_rng(seed)
    return [gnp_generate(int(rng.integers(10, 26)), float(rng.choice([0.3, 0.5, 0.7, 0.9])), int(rng.integers(1 << 31)))
            for _ in range(count)]


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_exact_across_strategies_and_toggles(strategy):
    for g in _panel():
        w = omega_oracle(g)
        for bounds_on, red_on in itertools.product((False, True), repeat=2):
            cfg = SolverConfig(
                max_leaf_size=6,
                strategy=strategy,
                backend="exact",
                upper_bounds=UPPER_BOUNDS if bounds_on else (),
                lower_bounds=LOWER_BOUNDS if bounds_on else (),
                reductions=REDUCTIONS if red_on else (),
            )
            r = dbk_solve(g, cfg)
            assert r.omega == w == len(r.clique)
            assert g.is_clique(g.index_of(r.clique))


def test_report_invariants_from_trace():
    g = gnp_generate(60, 0.6, 1)
    cfg = SolverConfig(max_leaf_size=12, trace=True)
    r = dbk_solve(g, cfg)
    assert r.omega == len(r.clique)
    assert r.subgraphs_pruned <= r.subgraphs_generated
    assert r.incumbent_history == sorted(r.incumbent_history)
    leaves = [e for e in r.trace if e["event"] == "leaf"]
    assert len(leaves) == r.leaves_solved
    assert all(e["size"] <= 12 for e in leaves)
    assert r.largest_leaf == max(e["size"] for e in leaves)
    # conservation: the total is the sum of the per-leaf charges
    assert r.charged_tts_seconds == pytest.approx(sum(e["charge"] for e in leaves), abs=1e-12)
    splits = [e for e in r.trace if e["event"] == "split"]
    assert r.subgraphs_generated == 2 * len(splits)


class CheckingBackend:
    """Exact backend that asserts the subproblem invariants on every leaf."""

    name = "checking"
    exact = True

    def __init__(self, root: Graph):
        self.root = root
        self.calls = 0

    def solve(self, graph, anchors, rng):
        self.calls += 1
        anchors = [int(a) for a in anchors]
        assert not set(anchors) & set(int(x) for x in graph.labels)
        a_idx = self.root.index_of(anchors)
        g_idx = self.root.index_of(graph.labels)
        assert self.root.is_clique(a_idx)
        for a in a_idx:
            assert self.root.adj[a, g_idx].all()
        return kernels.max_clique(graph.adj), 0.0


@pytest.mark.parametrize("reductions", [(), tuple(sorted(REDUCTIONS))])
def test_anchor_invariants(reductions):
    g = gnp_generate(40, 0.7, 2)
    backend = CheckingBackend(g)
    cfg = SolverConfig(max_leaf_size=8, reductions=reductions)
    r = dbk_solve(g, cfg, backend)
    assert backend.calls > 0
    assert r.omega == omega_oracle(g)


def test_pruning_is_directional():
    rng = np.random.default_rng(4)
    for _ in range(15):
        g = gnp_generate(40, float(rng.choice([0.3, 0.5, 0.7, 0.9])), int(rng.integers(1 << 31)))
        for strategy in ("lowest-degree", "random"):
            off = dbk_solve(g, SolverConfig(max_leaf_size=8, strategy=strategy, upper_bounds=(), seed=9))
            on = dbk_solve(g, SolverConfig(max_leaf_size=8, strategy=strategy, upper_bounds={"greedy-coloring"}, seed=9))
            assert on.subgraphs_generated <= off.subgraphs_generated
            assert on.omega == off.omega


def test_single_worker_is_deterministic():
    g = gnp_generate(50, 0.7, 5)
    cfg = SolverConfig(max_leaf_size=10, strategy="random", seed=3)
    a, b = dbk_solve(g, cfg).to_dict(), dbk_solve(g, cfg).to_dict()
    for d in (a, b):
        d.pop("wall_seconds")
    assert a == b


def test_parallel_workers_agree():
    g = gnp_generate(60, 0.8, 6)
    serial = dbk_solve(g, SolverConfig(max_leaf_size=12))
    parallel = dbk_solve(g, SolverConfig(max_leaf_size=12, workers=4))
    assert parallel.omega == serial.omega
    assert g.is_clique(g.index_of(parallel.clique))


def test_sa_backend_is_flagged_heuristic():
    g = gnp_generate(30, 0.5, 7)
    r = dbk_solve(g, SolverConfig(backend="sa", max_leaf_size=12, sa_sweeps=200))
    assert not r.exact
    assert g.is_clique(g.index_of(r.clique))
    assert r.omega <= omega_oracle(g)


class FailingBackend:
    name = "failing"
    exact = True

    def solve(self, graph, anchors, rng):
        raise RuntimeError("hardware offline")


def test_backend_failure_carries_context():
    with pytest.raises(BackendError, match="hardware offline"):
        dbk_solve(gnp_generate(20, 0.5, 1), SolverConfig(max_leaf_size=5), FailingBackend())


class LyingBackend:
    name = "lying"
    exact = True

    def solve(self, graph, anchors, rng):
        return np.arange(graph.n), 0.0


def test_non_clique_from_backend_aborts():
    with pytest.raises(CliqueVerificationError):
        dbk_solve(gnp_generate(20, 0.3, 1), SolverConfig(max_leaf_size=20), LyingBackend())


# -- decompose -------------------------------------------------------------------------------


def test_decompose_triangle():
    leaves, report = decompose(Graph.complete(3))
    assert len(leaves) == 1
    assert labels_of(leaves[0].graph) == [1, 2, 3]


def test_decompose_k5_respects_size():
    leaves, _ = decompose(Graph.complete(5), SolverConfig(max_leaf_size=3))
    assert leaves and all(leaf.graph.n <= 3 for leaf in leaves)


def test_decompose_random_graph():
    leaves, report = decompose(gnp_generate(80, 0.3, 1))
    assert leaves and all(leaf.graph.n <= 46 for leaf in leaves)
    assert report.leaves_solved == len(leaves)
