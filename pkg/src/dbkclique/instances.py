"""Constructive generators for the structured DIMACS clique benchmarks.

The hamming, johnson and keller families of the second DIMACS challenge
are defined combinatorially, so they can be rebuilt without the original
files.  Vertex numbering may differ from the distributed files; the graphs
are isomorphic to them.
"""
from __future__ import annotations

import itertools

import numpy as np

from .graph import Graph


def hamming(bits: int, distance: int) -> Graph:
    """Words of length ``bits``; adjacent when they differ in >= ``distance`` positions."""
    words = np.arange(1 << bits)
    diff = words[:, None] ^ words[None, :]
    dist = np.bitwise_count(diff.astype(np.uint64))
    return Graph(dist >= distance, np.arange(1, len(words) + 1))


def johnson(n: int, w: int, distance: int) -> Graph:
    """``w``-subsets of an ``n``-set; adjacent when their symmetric difference is >= ``distance``."""
    subsets = [frozenset(c) for c in itertools.combinations(range(n), w)]
    k = len(subsets)
    adj = np.zeros((k, k), dtype=bool)
    for i, j in itertools.combinations(range(k), 2):
        if len(subsets[i] ^ subsets[j]) >= distance:
            adj[i, j] = adj[j, i] = True
    return Graph(adj, np.arange(1, k + 1))


def keller_full(dim: int) -> Graph:
    """Keller graph on {0,1,2,3}^dim: adjacent when the tuples differ in at least
    two coordinates and differ by exactly 2 (mod 4) in at least one of them."""
    verts = np.array(list(itertools.product(range(4), repeat=dim)), dtype=np.int64)
    d = (verts[:, None, :] - verts[None, :, :]) % 4
    adj = ((d != 0).sum(axis=2) >= 2) & (d == 2).any(axis=2)
    return Graph(adj, np.arange(1, len(verts) + 1))


def keller(dim: int) -> Graph:
    """DIMACS ``keller<dim>``: the neighbourhood of one vertex of the Keller graph."""
    full = keller_full(dim)
    return full.induced(full.neighbors(0)).relabeled()


BUILDERS = {
    "hamming6-2": lambda: hamming(6, 2),
    "hamming6-4": lambda: hamming(6, 4),
    "hamming8-2": lambda: hamming(8, 2),
    "hamming8-4": lambda: hamming(8, 4),
    "johnson8-2-4": lambda: johnson(8, 2, 4),
    "johnson8-4-4": lambda: johnson(8, 4, 4),
    "johnson16-2-4": lambda: johnson(16, 2, 4),
    "keller4": lambda: keller(4),
}


def build(name: str) -> Graph:
    try:
        return BUILDERS[name]()
    except KeyError:
        raise KeyError(f"no constructive generator for {name!r}; known: {sorted(BUILDERS)}") from None
