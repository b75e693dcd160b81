"""Undirected simple graphs, DIMACS I/O, G(n, p) sampling and k-core reductions."""
from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels


class DimacsParseError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph.

    ``adj`` is a read-only boolean adjacency matrix; ``rows`` exposes the same
    data packed into uint64 words so that a neighbourhood intersection costs
    ``n / 64`` word operations.  ``labels[i]`` is the external (1-based) id of
    internal vertex ``i``.
    """

    adj: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adj, dtype=bool, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if np.any(np.diagonal(adj)):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        if labels.shape != (adj.shape[0],):
            raise ValueError("one label per vertex required")
        adj.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "adj", adj)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def _trusted(cls, adj: np.ndarray, labels: np.ndarray) -> "Graph":
        """Wrap arrays already known to satisfy the invariants (no copy, no checks)."""
        g = object.__new__(cls)
        adj.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(g, "adj", adj)
        object.__setattr__(g, "labels", labels)
        return g

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None) -> "Graph":
        """Build from 0-based edge pairs."""
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            adj[u, v] = adj[v, u] = True
        if labels is None:
            labels = np.arange(1, n + 1)
        return cls(adj, labels)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(np.zeros((n, n), dtype=bool), np.arange(1, n + 1))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(~np.eye(n, dtype=bool), np.arange(1, n + 1))

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def __len__(self) -> int:
        return self.n

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1).astype(np.int64)

    @cached_property
    def m(self) -> int:
        return int(self.degrees.sum()) // 2

    @cached_property
    def rows(self) -> np.ndarray:
        return kernels.pack_rows(self.adj)

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.adj[v])

    def common_neighbors(self, u: int, v: int) -> int:
        return int(np.bitwise_count(self.rows[u] & self.rows[v]).sum())

    def edges(self) -> np.ndarray:
        """0-based (u, v) pairs with u < v in row-major order."""
        iu, ju = np.nonzero(np.triu(self.adj, 1))
        return np.stack([iu, ju], axis=1)

    def induced(self, vertices) -> "Graph":
        idx = np.asarray(vertices, dtype=np.int64)
        return Graph._trusted(self.adj[idx][:, idx], self.labels[idx])

    def relabeled(self) -> "Graph":
        """Same graph with labels reset to 1..n."""
        return Graph._trusted(self.adj, np.arange(1, self.n + 1))

    def complement(self) -> "Graph":
        return Graph(~self.adj & ~np.eye(self.n, dtype=bool), self.labels)

    def is_clique(self, vertices) -> bool:
        idx = np.asarray(vertices, dtype=np.int64)
        k = len(idx)
        if k and (idx.min() < 0 or idx.max() >= self.n):
            return False
        # no self-loops, so a repeated vertex makes the count fall short
        return bool(np.count_nonzero(self.adj[idx][:, idx]) == k * (k - 1))

    @cached_property
    def _label_index(self) -> dict:
        return {int(lab): i for i, lab in enumerate(self.labels)}

    def index_of(self, labels) -> np.ndarray:
        """Internal indices for the given external labels."""
        lookup = self._label_index
        return np.array([lookup[int(lab)] for lab in labels], dtype=np.int64)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


# ---------------------------------------------------------------------------
# DIMACS


def parse_dimacs(source) -> Graph:
    """Read a DIMACS clique instance (``p edge n m`` plus ``e u v`` lines).

    ``source`` may be bytes, a str holding the file contents, a path, or an
    open text/binary stream.
    """
    if isinstance(source, Path):
        text = source.read_text()
    elif isinstance(source, bytes):
        text = source.decode()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode()

    n = None
    us: list[int] = []
    vs: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise DimacsParseError("duplicate problem line", lineno)
            if len(parts) < 4:
                raise DimacsParseError("malformed problem line", lineno)
            try:
                n = int(parts[2])
                int(parts[3])
            except ValueError:
                raise DimacsParseError("malformed problem line", lineno) from None
            if n < 0:
                raise DimacsParseError("negative vertex count", lineno)
        elif tag == "e":
            if n is None:
                raise DimacsParseError("edge line before problem line", lineno)
            if len(parts) < 3:
                raise DimacsParseError("malformed edge line", lineno)
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise DimacsParseError("malformed edge line", lineno) from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsParseError(f"endpoint out of range [1, {n}]", lineno)
            if u == v:
                raise DimacsParseError(f"self-loop on vertex {u}", lineno)
            us.append(u - 1)
            vs.append(v - 1)
        elif tag == "n":
            continue
        else:
            raise DimacsParseError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise DimacsParseError("missing 'p edge' line")
    adj = np.zeros((n, n), dtype=bool)
    adj[us, vs] = True
    adj[vs, us] = True
    return Graph(adj, np.arange(1, n + 1))


def read_dimacs(path) -> Graph:
    return parse_dimacs(Path(path))


def format_dimacs(graph: Graph, comments: Iterable[str] = ()) -> str:
    """DIMACS text with sorted 1-based ``e u v`` lines, u < v (internal order)."""
    out = io.StringIO()
    for c in comments:
        out.write(f"c {c}\n")
    out.write(f"p edge {graph.n} {graph.m}\n")
    for u, v in graph.edges():
        out.write(f"e {u + 1} {v + 1}\n")
    return out.getvalue()


def write_dimacs(graph: Graph, target, comments: Iterable[str] = ()) -> None:
    text = format_dimacs(graph, comments)
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    else:
        target.write(text)


# ---------------------------------------------------------------------------
# random graphs


def gnp_generate(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p).

    Uses numpy's PCG64 generator seeded with ``seed``: one uniform draw per
    unordered pair (i, j), i < j, in row-major order; the pair becomes an
    edge when the draw is below ``p``.  The stream is platform independent.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError("vertex count must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    adj = np.zeros((n, n), dtype=bool)
    adj[iu[keep], ju[keep]] = True
    adj |= adj.T
    return Graph(adj, np.arange(1, n + 1))


# ---------------------------------------------------------------------------
# structural operations


def neighborhood_subgraph(graph: Graph, v: int) -> Graph:
    """Subgraph induced by the neighbours of ``v`` (``v`` itself excluded)."""
    return graph.induced(graph.neighbors(v))


def remove_vertex(graph: Graph, v: int) -> Graph:
    keep = np.ones(graph.n, dtype=bool)
    keep[v] = False
    return graph.induced(np.flatnonzero(keep))


def core_numbers(graph: Graph) -> np.ndarray:
    return kernels.core_peel(graph.adj)[0]


def vertex_kcore(graph: Graph, k: int) -> np.ndarray:
    """Vertices of the k-core (sorted internal indices)."""
    if k <= 0:
        return np.arange(graph.n)
    return np.flatnonzero(core_numbers(graph) >= k)


def edge_kcore(graph: Graph, L: int, compat: bool = False) -> Graph:
    """Remove edges that cannot lie in a clique with more than ``L`` vertices.

    Edges whose endpoints share fewer than ``L - 1`` neighbours are dropped
    until no such edge remains.  ``compat=True`` uses the looser ``L - 2``
    threshold instead.  Vertices are kept, possibly isolated.
    """
    threshold = L - 2 if compat else L - 1
    if threshold <= 0 or graph.n == 0:
        return graph
    return Graph._trusted(kernels.edge_kcore_adj(graph.adj, threshold), graph.labels)


def density(graph: Graph) -> float:
    n = graph.n
    if n <= 1:
        return 0.0
    return 2.0 * graph.m / (n * (n - 1))
