"""Roof-duality persistencies for QUBOs.

The QUBO is rewritten as a posiform (non-negative terms over literals x_i
and their complements), each term becomes a pair of mirrored arcs in the
implication network on the 2n + 2 literal nodes, and a maximum flow from
x0 to its complement is computed.  Literals reachable from x0 in the
residual network are true in every minimiser.  The strongly connected
components of the remaining residual network, processed sinks first, give
further fixings that hold together in at least one minimiser; only those
where x_i and its complement are ordered by a residual path are reported,
so a pure tie between optima leaves the variable free.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import maximum_flow

from .qubo import Qubo

SOURCE, SINK = 0, 1


def _lit(i: int, positive: bool) -> int:
    return 2 + 2 * i + (0 if positive else 1)


@dataclass(frozen=True)
class PersistencyResult:
    fixed: dict  # variable -> (value, "strong" | "weak")
    reduced: Qubo
    free: np.ndarray  # original index of each reduced variable
    constant_shift: float
    roof_bound: float = field(default=0.0)  # lower bound on min E

    def values(self, strength: str | None = None) -> dict:
        return {v: val for v, (val, s) in self.fixed.items() if strength is None or s == strength}

    def ones(self, strength: str | None = None) -> list[int]:
        return sorted(v for v, val in self.values(strength).items() if val == 1)

    def zeros(self, strength: str | None = None) -> list[int]:
        return sorted(v for v, val in self.values(strength).items() if val == 0)


def _integer_scale(values: np.ndarray) -> int:
    for scale in (1, 2, 4, 8, 10, 100, 1000, 10**6, 10**9):
        scaled = values * scale
        if np.allclose(scaled, np.round(scaled), rtol=0, atol=1e-9):
            return scale
    raise ValueError("QUBO coefficients cannot be scaled to integers for the flow network")


def _network(qubo: Qubo):
    """Arc list (tails, heads, capacities) of the implication network and its constant."""
    scale = _integer_scale(np.concatenate([qubo.linear, np.array(list(qubo.quadratic.values()))]))
    lin = np.round(qubo.linear * scale).astype(np.int64)
    const = 0
    tails: list[int] = []
    heads: list[int] = []
    caps: list[int] = []

    def term(u: int, w: int, a: int):
        # a * u * w  ->  u => not w, w => not u
        tails.extend((u, w))
        heads.extend((w ^ 1, u ^ 1))
        caps.extend((a, a))

    for (i, j), c in qubo.quadratic.items():
        a = int(round(c * scale))
        if a > 0:
            term(_lit(i, True), _lit(j, True), a)
        elif a < 0:
            term(_lit(i, True), _lit(j, False), -a)
            lin[i] += a
    for i, b in enumerate(lin):
        if b > 0:
            term(_lit(i, True), SOURCE, int(b))
        elif b < 0:
            const += int(b)
            term(_lit(i, False), SOURCE, int(-b))
    return tails, heads, caps, const, scale


def _residual(n_nodes: int, tails, heads, caps) -> tuple[np.ndarray, int]:
    C = np.zeros((n_nodes, n_nodes), dtype=np.int64)
    np.add.at(C, (np.asarray(tails, dtype=np.int64), np.asarray(heads, dtype=np.int64)), caps)
    if not tails:
        return C > 0, 0
    graph = coo_matrix(
        (np.asarray(caps, dtype=np.int32), (np.asarray(tails), np.asarray(heads))), shape=(n_nodes, n_nodes)
    ).tocsr()
    res = maximum_flow(graph, SOURCE, SINK, method="dinic")
    F = res.flow.toarray().astype(np.int64)
    F = F - F.T if (F >= 0).all() else F  # net flow, antisymmetric
    # symmetrise with the mirrored flow; doubles every quantity
    mirror = np.arange(n_nodes) ^ 1
    Fs = F + F[np.ix_(mirror, mirror)].T
    return (2 * C - Fs) > 0, int(res.flow_value)


def _reach(R: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(R.shape[0], dtype=bool)
    seen[start] = True
    frontier = np.array([start])
    while frontier.size:
        nxt = R[frontier].any(axis=0) & ~seen
        seen |= nxt
        frontier = np.flatnonzero(nxt)
    return seen


def _tarjan(succ: list[np.ndarray], nodes: np.ndarray) -> list[list[int]]:
    """Strongly connected components, emitted sinks first."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in nodes:
        root = int(root)
        if root in index:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, pos = work[-1]
            nbrs = succ[v]
            if pos < len(nbrs):
                work[-1] = (v, pos + 1)
                w = int(nbrs[pos])
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def reduce_qubo(qubo: Qubo, values: dict) -> tuple[Qubo, np.ndarray, float]:
    """Substitute fixed values; return (reduced QUBO, free variable ids, constant)."""
    free = np.array([i for i in range(qubo.n) if i not in values], dtype=np.int64)
    pos = {int(v): k for k, v in enumerate(free)}
    lin = qubo.linear[free].copy() if free.size else np.zeros(0)
    shift = sum(float(qubo.linear[i]) * val for i, val in values.items())
    quad: dict[tuple[int, int], float] = {}
    for (i, j), c in qubo.quadratic.items():
        fi, fj = i in values, j in values
        if fi and fj:
            shift += c * values[i] * values[j]
        elif fi:
            if values[i]:
                lin[pos[j]] += c
        elif fj:
            if values[j]:
                lin[pos[i]] += c
        else:
            quad[(pos[i], pos[j])] = c
    return Qubo(len(free), lin, quad), free, shift


def persistency(qubo: Qubo) -> PersistencyResult:
    n = qubo.n
    n_nodes = 2 * n + 2
    tails, heads, caps, const, scale = _network(qubo)
    R, flow = _residual(n_nodes, tails, heads, caps)

    assigned: dict[int, tuple[int, str]] = {}
    reach = _reach(R, SOURCE)
    for node in np.flatnonzero(reach):
        if node < 2:
            continue
        i, neg = (node - 2) // 2, (node - 2) % 2
        val = 0 if neg else 1
        if i in assigned and assigned[i][0] != val:
            raise RuntimeError("inconsistent strong persistencies")  # cannot happen for a maximum flow
        assigned[int(i)] = (val, "strong")

    closed = reach | reach[np.arange(n_nodes) ^ 1]
    rest = np.flatnonzero(~closed)
    if rest.size:
        sub = R[np.ix_(rest, rest)]
        succ: list[np.ndarray] = [np.zeros(0, dtype=np.int64)] * n_nodes
        for k, v in enumerate(rest):
            succ[int(v)] = rest[np.flatnonzero(sub[k])]
        comps = _tarjan(succ, rest)
        comp_of = {v: c for c, comp in enumerate(comps) for v in comp}
        # reachability between components as int bitsets; sinks come first
        reach_c = [0] * len(comps)
        for c, comp in enumerate(comps):
            bits = 1 << c
            for v in comp:
                for w in succ[v]:
                    bits |= reach_c[comp_of[int(w)]]
            reach_c[c] = bits
        weak: dict[int, int] = {}
        for comp in comps:
            vars_in = {(v - 2) // 2 for v in comp}
            if any(i in assigned or i in weak for i in vars_in):
                continue
            if len(vars_in) < len(comp):  # holds a literal and its complement
                continue
            for v in comp:
                weak[(v - 2) // 2] = 0 if (v - 2) % 2 else 1
        # keep a fixing only when the implications order x_i and its
        # complement; otherwise the choice just picks one of several optima
        for i, val in sorted(weak.items()):
            a, b = comp_of[_lit(i, True)], comp_of[_lit(i, False)]
            if (reach_c[a] >> b) & 1 or (reach_c[b] >> a) & 1:
                assigned[i] = (val, "weak")

    values = {i: val for i, (val, _) in assigned.items()}
    reduced, free, shift = reduce_qubo(qubo, values)
    roof = const / scale + flow / (2.0 * scale)
    return PersistencyResult(dict(sorted(assigned.items())), reduced, free, shift, roof)
