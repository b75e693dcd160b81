"""Decomposition branch and bound for maximum clique.

A graph is split at a vertex v into the neighbourhood graph G_v (v is
committed to the clique as an *anchor*) and G - v, since

    omega(G) = max(omega(G_v) + 1, omega(G - v)).

Splitting stops once a subproblem has at most ``max_leaf_size`` vertices;
such leaves go to a backend.  Before splitting, k-core / persistency
reductions shrink the subproblem and clique-number bounds may prune it
against the incumbent.
"""
from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from . import bounds as _bounds
from . import kernels
from .anneal import TtsModel, tts_lookup
from .graph import Graph, density, edge_kcore, neighborhood_subgraph, remove_vertex, vertex_kcore
from .persistency import persistency
from .qubo import maxclique_to_qubo, simulated_annealing_solve

STRATEGIES = (
    "lowest-degree",
    "median-degree",
    "random",
    "highest-degree",
    "kcore-removal",
    "lowest-degree-sparsest-Gv",
)
UPPER_BOUNDS = frozenset({"greedy-coloring", "dense-edge", "lovasz"})
LOWER_BOUNDS = frozenset({"greedy-clique", "sibling"})
REDUCTIONS = frozenset({"vertex-kcore", "edge-kcore", "persistency"})
BACKENDS = ("exact", "sa", "emulated-annealer")


class CliqueVerificationError(RuntimeError):
    """A candidate clique failed verification against the input graph."""


class BackendError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    max_leaf_size: int = 46
    strategy: str = "lowest-degree"
    upper_bounds: frozenset = frozenset({"greedy-coloring", "dense-edge"})
    lower_bounds: frozenset = frozenset({"sibling"})
    reductions: frozenset = frozenset({"vertex-kcore", "edge-kcore"})
    backend: str = "emulated-annealer"
    seed: int = 0
    lovasz_cutoff: int = 60
    lovasz_tol: float = 1e-3
    dense_threshold: float = 0.8
    workers: int = 1
    edge_kcore_compat: bool = False
    greedy_starts: int = 8
    sa_sweeps: int = 1000
    sa_restarts: int = 4
    tts_table: TtsModel | None = None
    trace: bool = False

    def __post_init__(self):
        for name in ("upper_bounds", "lower_bounds", "reductions"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.max_leaf_size < 1:
            raise ValueError("max_leaf_size must be >= 1")
        if not 0.0 <= self.dense_threshold <= 1.0:
            raise ValueError("dense_threshold must lie in [0, 1]")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        for name, allowed in (
            ("upper_bounds", UPPER_BOUNDS),
            ("lower_bounds", LOWER_BOUNDS),
            ("reductions", REDUCTIONS),
        ):
            unknown = getattr(self, name) - allowed
            if unknown:
                raise ValueError(f"unknown {name}: {sorted(unknown)}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def baseline(cls, **kw) -> "SolverConfig":
        """Plain decomposition: no bounds, edge k-core only."""
        kw.setdefault("upper_bounds", frozenset())
        kw.setdefault("lower_bounds", frozenset())
        kw.setdefault("reductions", frozenset({"edge-kcore"}))
        return cls(**kw)

    @classmethod
    def full(cls, **kw) -> "SolverConfig":
        """Every bound and reduction enabled."""
        kw.setdefault("upper_bounds", frozenset(UPPER_BOUNDS))
        kw.setdefault("lower_bounds", frozenset(LOWER_BOUNDS))
        kw.setdefault("reductions", frozenset(REDUCTIONS))
        return cls(**kw)

    def canonical(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            if k in ("trace", "workers"):
                continue
            if isinstance(v, frozenset):
                v = sorted(v)
            elif isinstance(v, TtsModel):
                v = [list(r.__dict__.values()) for r in v.rows]
            out[k] = v
        return out


@dataclass(frozen=True)
class Subproblem:
    graph: Graph
    anchors: tuple = ()
    depth: int = 0
    path: tuple = ()


@dataclass(frozen=True)
class Incumbent:
    clique: tuple = ()

    @property
    def size(self) -> int:
        return len(self.clique)


def incumbent_update(current: Incumbent, candidate, graph: Graph) -> Incumbent:
    """Keep the larger clique; ``candidate`` holds labels of ``graph``."""
    labels = tuple(sorted(int(x) for x in candidate))
    try:
        idx = graph.index_of(labels)
    except KeyError as exc:
        raise CliqueVerificationError(f"unknown vertex {exc} in candidate clique") from None
    if not graph.is_clique(idx):
        raise CliqueVerificationError(f"candidate {labels} is not a clique")
    return Incumbent(labels) if len(labels) > current.size else current


@dataclass
class SolveReport:
    omega: int
    clique: tuple
    subgraphs_generated: int = 0
    subgraphs_pruned: int = 0
    leaves_solved: int = 0
    charged_tts_seconds: float = 0.0
    wall_seconds: float = 0.0
    exact: bool = True
    largest_leaf: int = 0
    incumbent_history: list = field(default_factory=list)
    trace: list | None = None

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["clique"] = list(self.clique)
        if d["trace"] is None:
            del d["trace"]
        return d


# ---------------------------------------------------------------------------
# vertex selection and splitting


class _NodeRng:
    """Generator for one decomposition node, seeded from (root seed, node path).

    Created lazily: most nodes never need a random draw.
    """

    __slots__ = ("_seed", "_path", "_gen")

    def __init__(self, seed: int, path: tuple):
        self._seed = seed
        self._path = path
        self._gen = None

    def __getattr__(self, name):
        if self._gen is None:
            self._gen = np.random.default_rng(np.random.SeedSequence(self._seed, spawn_key=self._path))
        return getattr(self._gen, name)


def _pick(cands: np.ndarray, rng) -> int:
    if len(cands) == 1:
        return int(cands[0])
    return int(cands[rng.integers(len(cands))])


def select_vertex(graph: Graph, strategy: str, rng=None) -> int:
    if graph.n == 0:
        raise ValueError("cannot select a vertex of an empty graph")
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    deg = graph.degrees
    if strategy == "lowest-degree":
        cands = np.flatnonzero(deg == deg.min())
    elif strategy == "highest-degree":
        cands = np.flatnonzero(deg == deg.max())
    elif strategy == "median-degree":
        target = np.sort(deg)[math.ceil(graph.n / 2) - 1]
        cands = np.flatnonzero(deg == target)
    elif strategy == "random":
        cands = np.arange(graph.n)
    elif strategy == "kcore-removal":
        core = kernels.core_peel(graph.adj)[0]
        cands = np.flatnonzero(core == core.min())
    elif strategy == "lowest-degree-sparsest-Gv":
        low = np.flatnonzero(deg == deg.min())
        A = graph.adj.astype(np.int64)
        d = deg[low]
        edges = ((A[low] @ A) * A[low]).sum(axis=1) // 2
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.where(d > 1, 2.0 * edges / (d * (d - 1.0)), 0.0)
        cands = low[dens == dens.min()]
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return _pick(cands, rng)


def split(graph: Graph, v: int) -> tuple[Graph, Graph]:
    """(neighbourhood graph of v, graph without v)."""
    return neighborhood_subgraph(graph, v), remove_vertex(graph, v)


# ---------------------------------------------------------------------------
# leaf backends


def _repair_clique(graph: Graph, chosen: np.ndarray) -> np.ndarray:
    adj = graph.adj
    sel = list(map(int, chosen))
    while sel:
        sub = adj[np.ix_(sel, sel)]
        missing = len(sel) - 1 - sub.sum(axis=1)
        if missing.max() == 0:
            break
        sel.pop(int(np.argmax(missing)))
    cand = np.ones(graph.n, dtype=bool)
    for v in sel:
        cand &= adj[v]
    while cand.any():
        u = int(np.flatnonzero(cand)[0])
        sel.append(u)
        cand &= adj[u]
    return np.sort(np.asarray(sel, dtype=np.int64))


class ExactBackend:
    name = "exact"
    exact = True

    def solve(self, graph: Graph, anchors, rng):
        return kernels.max_clique(graph.adj), 0.0


class EmulatedAnnealerBackend:
    name = "emulated-annealer"
    exact = True

    def __init__(self, model: TtsModel | None = None):
        self.model = model or TtsModel.default()

    def solve(self, graph: Graph, anchors, rng):
        return kernels.max_clique(graph.adj), tts_lookup(self.model, density(graph))


class SABackend:
    name = "sa"
    exact = False

    def __init__(self, sweeps: int = 1000, restarts: int = 4):
        self.sweeps = sweeps
        self.restarts = restarts

    def solve(self, graph: Graph, anchors, rng):
        q = maxclique_to_qubo(graph)
        seed = int(rng.integers(2**63))
        x, _ = simulated_annealing_solve(q, sweeps=self.sweeps, restarts=self.restarts, seed=seed)
        return _repair_clique(graph, np.flatnonzero(x)), 0.0


@dataclass(frozen=True)
class Leaf:
    graph: Graph
    anchors: tuple


class CollectBackend:
    """Records leaves instead of solving them."""

    name = "collect"
    exact = False

    def __init__(self):
        self.leaves: list[Leaf] = []
        self._lock = threading.Lock()

    def solve(self, graph: Graph, anchors, rng):
        with self._lock:
            self.leaves.append(Leaf(graph, tuple(anchors)))
        return None, 0.0


def make_backend(config: SolverConfig):
    if config.backend == "exact":
        return ExactBackend()
    if config.backend == "sa":
        return SABackend(config.sa_sweeps, config.sa_restarts)
    return EmulatedAnnealerBackend(config.tts_table)


# ---------------------------------------------------------------------------
# driver


class _Run:
    def __init__(self, graph: Graph, config: SolverConfig, backend):
        self.root = graph
        self.config = config
        self.backend = backend
        self.lock = threading.Lock()
        self.incumbent = Incumbent()
        self.heuristic_best = 0
        self.generated = 0
        self.pruned = 0
        self.leaves = 0
        self.largest_leaf = 0
        self.charges: list[float] = []
        self.history: list[int] = []
        self.trace: list | None = [] if config.trace else None
        self.sibling = "sibling" in config.lower_bounds

    # shared state ----------------------------------------------------------
    def event(self, what: str, sub: Subproblem, **info):
        if self.trace is not None:
            with self.lock:
                self.trace.append({"event": what, "node": "".join(map(str, sub.path)) or "root", **info})

    def best_size(self) -> int:
        with self.lock:
            return self.incumbent.size

    def target(self) -> int:
        """Lower bound that upper bounds are compared against.

        With the sibling bound disabled only heuristic cliques count, not
        the results of solved branches.
        """
        with self.lock:
            return self.incumbent.size if self.sibling else self.heuristic_best

    def offer(self, labels, sub: Subproblem, source: str, heuristic: bool):
        with self.lock:
            new = incumbent_update(self.incumbent, labels, self.root)
            if heuristic:
                self.heuristic_best = max(self.heuristic_best, len(labels))
            if new is not self.incumbent:
                self.incumbent = new
                self.history.append(new.size)
                if self.trace is not None:
                    self.trace.append(
                        {"event": "incumbent", "node": "".join(map(str, sub.path)) or "root",
                         "size": new.size, "source": source}
                    )

    def rng(self, sub: Subproblem):
        return _NodeRng(self.config.seed, sub.path)

    # one node --------------------------------------------------------------
    def upper_bound(self, g: Graph, decide: int | None = None) -> int | None:
        """Minimum of the enabled upper bounds.

        The cheap bounds run first; theta is skipped when they already reach
        ``decide`` and otherwise only needs to settle ``ub <= decide``.
        """
        cfg = self.config
        ubs = []
        lovasz = "lovasz" in cfg.upper_bounds
        if "greedy-coloring" in cfg.upper_bounds or (lovasz and g.n > cfg.lovasz_cutoff):
            ubs.append(_bounds.greedy_coloring_ub(g).value)
        if "dense-edge" in cfg.upper_bounds and density(g) > cfg.dense_threshold:
            ubs.append(_bounds.dense_edge_ub(g).value)
        if lovasz and g.n <= cfg.lovasz_cutoff and not (ubs and decide is not None and min(ubs) <= decide):
            try:
                ubs.append(
                    _bounds.lovasz_theta_ub(g, tol=cfg.lovasz_tol, cutoff=cfg.lovasz_cutoff, decide=decide).value
                )
            except _bounds.BoundRefused:
                ubs.append(_bounds.greedy_coloring_ub(g).value)
        return min(ubs) if ubs else None

    def process(self, sub: Subproblem) -> list[Subproblem]:
        cfg = self.config
        g = sub.graph
        anchors = tuple(sub.anchors)
        self.event("open", sub, size=g.n, anchors=len(anchors))
        rng = None

        L = self.best_size() - len(anchors)
        if "vertex-kcore" in cfg.reductions and L > 0:
            keep = vertex_kcore(g, L)
            if len(keep) < g.n:
                g = g.induced(keep)
        if "edge-kcore" in cfg.reductions and g.n:
            reduced = edge_kcore(g, L, compat=cfg.edge_kcore_compat)
            if reduced.m != g.m:
                g = reduced
                if "vertex-kcore" in cfg.reductions and L > 0:
                    keep = vertex_kcore(g, L)
                    if len(keep) < g.n:
                        g = g.induced(keep)
        if "persistency" in cfg.reductions and g.n:
            g, anchors = self.apply_persistency(g, anchors, sub)
        if g.n == 0:
            self.offer(anchors, sub, "anchors", heuristic=False)
            self.event("exhausted", sub, anchors=len(anchors))
            return []

        if "greedy-clique" in cfg.lower_bounds:
            rng = rng or self.rng(sub)
            lb = _bounds.greedy_clique_lb(g, rng, starts=cfg.greedy_starts)
            self.event("bound", sub, kind="lower", method=lb.method, value=lb.value)
            self.offer(anchors + tuple(g.labels[lb.witness]), sub, "greedy-clique", heuristic=True)

        ub = self.upper_bound(g, self.target() - len(anchors))
        if ub is not None:
            self.event("bound", sub, kind="upper", value=ub)
            if len(anchors) + ub <= self.target():
                with self.lock:
                    self.pruned += 1
                self.event("pruned", sub, ub=ub, anchors=len(anchors))
                return []

        if g.n <= cfg.max_leaf_size:
            rng = rng or self.rng(sub)
            try:
                clique, charge = self.backend.solve(g, anchors, rng)
            except Exception as exc:  # noqa: BLE001 - re-raised with context
                node = "".join(map(str, sub.path)) or "root"
                raise BackendError(f"backend {self.backend.name} failed on node {node} (n={g.n}): {exc}") from exc
            with self.lock:
                self.leaves += 1
                self.largest_leaf = max(self.largest_leaf, g.n)
                self.charges.append(charge)
            self.event("leaf", sub, size=g.n, charge=charge, anchors=len(anchors))
            if clique is not None:
                self.offer(anchors + tuple(g.labels[clique]), sub, "leaf", heuristic=False)
            return []

        rng = rng or self.rng(sub)
        v = select_vertex(g, cfg.strategy, rng)
        gv, gp = split(g, v)
        with self.lock:
            self.generated += 2
        self.event("split", sub, vertex=int(g.labels[v]), size=g.n)
        return [
            Subproblem(gv, anchors + (int(g.labels[v]),), sub.depth + 1, sub.path + (0,)),
            Subproblem(gp, anchors, sub.depth + 1, sub.path + (1,)),
        ]

    def apply_persistency(self, g: Graph, anchors: tuple, sub: Subproblem):
        res = persistency(maxclique_to_qubo(g))
        ones = res.ones()
        if ones:
            self.offer(anchors + tuple(g.labels[ones]), sub, "persistency", heuristic=True)
        keep = np.ones(g.n, dtype=bool)
        keep[res.zeros()] = False
        strong = res.ones("strong")
        for v in strong:
            keep &= g.adj[v]
        keep[strong] = False
        self.event("persistency", sub, fixed=len(res.fixed), strong_ones=len(strong))
        if strong:
            anchors = anchors + tuple(int(x) for x in g.labels[strong])
        if keep.all():
            return g, anchors
        return g.induced(np.flatnonzero(keep)), anchors

    # traversal -------------------------------------------------------------
    def run_serial(self, root: Subproblem):
        stack = [root]
        while stack:
            children = self.process(stack.pop())
            stack.extend(reversed(children))  # G_v child on top

    def run_parallel(self, root: Subproblem, workers: int):
        stack = [root]
        cond = threading.Condition()
        active = [0]
        errors: list[BaseException] = []

        def worker():
            while True:
                with cond:
                    while not stack and active[0] and not errors:
                        cond.wait()
                    if errors or (not stack and not active[0]):
                        cond.notify_all()
                        return
                    sub = stack.pop()
                    active[0] += 1
                try:
                    children = self.process(sub)
                except BaseException as exc:  # noqa: BLE001
                    with cond:
                        errors.append(exc)
                        active[0] -= 1
                        cond.notify_all()
                    return
                with cond:
                    stack.extend(reversed(children))
                    active[0] -= 1
                    cond.notify_all()

        threads = [threading.Thread(target=worker, daemon=True) for _ in range(workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if errors:
            raise errors[0]


def _execute(graph: Graph, config: SolverConfig, backend) -> _Run:
    run = _Run(graph, config, backend)
    root = Subproblem(graph)
    if config.workers > 1:
        run.run_parallel(root, config.workers)
    else:
        run.run_serial(root)
    return run


def dbk_solve(graph: Graph, config: SolverConfig | None = None, backend=None) -> SolveReport:
    """Maximum clique of ``graph`` by decomposition; clique reported as labels."""
    config = config or SolverConfig()
    backend = backend or make_backend(config)
    start = time.perf_counter()
    run = _execute(graph, config, backend)
    wall = time.perf_counter() - start
    inc = run.incumbent
    return SolveReport(
        omega=inc.size,
        clique=inc.clique,
        subgraphs_generated=run.generated,
        subgraphs_pruned=run.pruned,
        leaves_solved=run.leaves,
        charged_tts_seconds=math.fsum(run.charges),
        wall_seconds=wall,
        exact=bool(getattr(backend, "exact", False)),
        largest_leaf=run.largest_leaf,
        incumbent_history=run.history,
        trace=run.trace,
    )


def decompose(graph: Graph, config: SolverConfig | None = None) -> tuple[list[Leaf], SolveReport]:
    """Split until every remaining subproblem fits ``max_leaf_size``; leaves are not solved.

    Only heuristic lower bounds can prune here, since no leaf is solved.
    """
    config = config or SolverConfig()
    backend = CollectBackend()
    report = dbk_solve(graph, config, backend)
    return backend.leaves, report
