"""Hot inner loops.

Every kernel exists twice: a numba-compiled loop nest (``_*_jit``) and a
fallback written against numpy / Python integers (``_*_py``).  The public
wrappers pick one according to :mod:`dbkclique._accel`.  Both paths follow
the same visiting order, so they return identical results; the test-suite
checks this.
"""
from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit

_ONE = np.uint64(1)
_DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
_DEBRUIJN_TABLE = np.array(
    [
        0, 1, 48, 2, 57, 49, 28, 3, 61, 58, 50, 42, 38, 29, 17, 4,
        62, 55, 59, 36, 53, 51, 43, 22, 45, 39, 33, 30, 24, 18, 12, 5,
        63, 47, 56, 27, 60, 41, 37, 16, 54, 35, 52, 21, 44, 32, 23, 11,
        46, 26, 40, 15, 34, 20, 31, 10, 25, 14, 19, 9, 13, 8, 7, 6,
    ],
    dtype=np.int64,
)


def pack_rows(adj: np.ndarray) -> np.ndarray:
    """Pack a boolean (n, n) matrix into little-endian uint64 bit rows."""
    n = adj.shape[0]
    words = max(1, (n + 63) // 64)
    padded = np.zeros((n, words * 64), dtype=bool)
    padded[:, : adj.shape[1]] = adj
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").reshape(n, words)


def unpack_rows(rows: np.ndarray, n: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(rows).view(np.uint8).reshape(rows.shape[0], rows.shape[1] * 8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little", count=n).astype(bool)


# ---------------------------------------------------------------------------
# bit tricks (compiled only)


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True, inline="always")
def _ctz(x, table):
    low = x & (~x + np.uint64(1))
    return table[np.int64((low * _DEBRUIJN) >> np.uint64(58))]


# ---------------------------------------------------------------------------
# exact maximum clique: bitset branch and bound with greedy colouring bound


@njit(cache=True)
def _color_sort_jit(rows, P, order, color, U, Q, thr, table):
    words = rows.shape[1]
    for w in range(words):
        U[w] = P[w]
    k = 0
    cnt = 0
    start = 0
    while True:
        while start < words and U[start] == 0:
            start += 1
        if start == words:
            break
        k += 1
        for w in range(words):
            Q[w] = U[w]
        qw = start
        while True:
            while qw < words and Q[qw] == 0:
                qw += 1
            if qw == words:
                break
            v = qw * 64 + _ctz(Q[qw], table)
            bit = _ONE << np.uint64(v & 63)
            U[qw] &= ~bit
            for w in range(words):
                Q[w] &= ~rows[v, w]
            Q[qw] &= ~bit
            if k > thr:
                order[cnt] = v
                color[cnt] = k
                cnt += 1
    return cnt


@njit(cache=True)
def _max_clique_jit(rows, n, lb, table):
    words = rows.shape[1]
    P = np.zeros((n + 1, words), dtype=np.uint64)
    order = np.zeros((n + 1, n), dtype=np.int64)
    color = np.zeros((n + 1, n), dtype=np.int64)
    pos = np.zeros(n + 1, dtype=np.int64)
    C = np.zeros(n + 1, dtype=np.int64)
    best = np.zeros(n + 1, dtype=np.int64)
    U = np.zeros(words, dtype=np.uint64)
    Q = np.zeros(words, dtype=np.uint64)
    best_size = lb
    found = 0
    if n == 0:
        return best[:0].copy()
    for i in range(n):
        P[0, i >> 6] |= _ONE << np.uint64(i & 63)
    csize = 0
    d = 0
    cnt = _color_sort_jit(rows, P[0], order[0], color[0], U, Q, best_size, table)
    pos[0] = cnt - 1
    while True:
        if pos[d] < 0:
            if d == 0:
                break
            d -= 1
            csize -= 1
            v = C[csize]
            P[d, v >> 6] &= ~(_ONE << np.uint64(v & 63))
            pos[d] -= 1
            continue
        i = pos[d]
        if csize + color[d, i] <= best_size:
            pos[d] = -1
            continue
        v = order[d, i]
        C[csize] = v
        csize += 1
        nonempty = False
        for w in range(words):
            x = P[d, w] & rows[v, w]
            P[d + 1, w] = x
            if x != 0:
                nonempty = True
        if not nonempty:
            if csize > best_size:
                best_size = csize
                found = csize
                for j in range(csize):
                    best[j] = C[j]
            csize -= 1
            P[d, v >> 6] &= ~(_ONE << np.uint64(v & 63))
            pos[d] -= 1
            continue
        d += 1
        cnt = _color_sort_jit(rows, P[d], order[d], color[d], U, Q, best_size - csize, table)
        pos[d] = cnt - 1
    return best[:found].copy()


def _color_sort_py(nbr, P, thr):
    order = []
    colors = []
    U = P
    k = 0
    while U:
        k += 1
        Q = U
        while Q:
            low = Q & -Q
            v = low.bit_length() - 1
            U &= ~low
            Q &= ~nbr[v]
            Q &= ~low
            if k > thr:
                order.append(v)
                colors.append(k)
    return order, colors


def _max_clique_py(adj: np.ndarray, lb: int) -> np.ndarray:
    n = adj.shape[0]
    nbr = [int.from_bytes(np.packbits(adj[v], bitorder="little").tobytes(), "little") for v in range(n)]
    best = [lb, []]

    def expand(C, P):
        order, colors = _color_sort_py(nbr, P, best[0] - len(C))
        for i in range(len(order) - 1, -1, -1):
            if len(C) + colors[i] <= best[0]:
                return
            v = order[i]
            newP = P & nbr[v]
            if newP == 0:
                if len(C) + 1 > best[0]:
                    best[0] = len(C) + 1
                    best[1] = C + [v]
            else:
                expand(C + [v], newP)
            P &= ~(1 << v)

    if n:
        expand([], (1 << n) - 1)
    return np.asarray(best[1], dtype=np.int64)


def max_clique(adj: np.ndarray, lb: int = 0) -> np.ndarray:
    """Maximum clique of the graph with boolean adjacency ``adj``.

    Returns sorted vertex indices.  With ``lb > 0`` only cliques larger than
    ``lb`` are reported; an empty array means none exists.
    """
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    deg = adj.sum(axis=1)
    order = np.argsort(-deg, kind="stable")
    reordered = np.ascontiguousarray(adj[np.ix_(order, order)])
    if _accel.USE_JIT:
        local = _max_clique_jit(pack_rows(reordered), n, int(lb), _DEBRUIJN_TABLE)
    else:
        local = _max_clique_py(reordered, int(lb))
    return np.sort(order[local])


# ---------------------------------------------------------------------------
# k-core peeling (min current degree first, ties by lowest index)


@njit(cache=True)
def _core_peel_jit(adj):
    n = adj.shape[0]
    deg = np.zeros(n, dtype=np.int64)
    for v in range(n):
        for u in range(n):
            if adj[v, u]:
                deg[v] += 1
    alive = np.ones(n, dtype=np.bool_)
    core = np.zeros(n, dtype=np.int64)
    order = np.zeros(n, dtype=np.int64)
    cur = 0
    for step in range(n):
        best = -1
        bd = n + 1
        for v in range(n):
            if alive[v] and deg[v] < bd:
                bd = deg[v]
                best = v
        if bd > cur:
            cur = bd
        core[best] = cur
        order[step] = best
        alive[best] = False
        for u in range(n):
            if adj[best, u] and alive[u]:
                deg[u] -= 1
    return core, order


def _core_peel_py(adj):
    n = adj.shape[0]
    deg = adj.sum(axis=1).astype(np.int64)
    big = n + 1
    work = deg.copy()
    alive = np.ones(n, dtype=bool)
    core = np.zeros(n, dtype=np.int64)
    order = np.zeros(n, dtype=np.int64)
    cur = 0
    for step in range(n):
        best = int(np.argmin(work))
        cur = max(cur, int(work[best]))
        core[best] = cur
        order[step] = best
        alive[best] = False
        work[best] = big
        work -= adj[best] & alive
    return core, order


def core_peel(adj: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Core number of every vertex and the peeling order."""
    adj = np.ascontiguousarray(adj, dtype=bool)
    if adj.shape[0] == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy()
    if _accel.USE_JIT:
        return _core_peel_jit(adj)
    return _core_peel_py(adj)


# ---------------------------------------------------------------------------
# edge k-core: drop edges with fewer than `threshold` common neighbours


@njit(cache=True)
def _edge_kcore_jit(rows, n, threshold, table):
    words = rows.shape[1]
    changed = True
    while changed:
        changed = False
        for u in range(n):
            for w in range(u >> 6, words):
                x = rows[u, w]
                if w == (u >> 6):
                    # keep only bits strictly above u
                    sh = np.uint64((u & 63) + 1)
                    if sh == np.uint64(64):
                        x = np.uint64(0)
                    else:
                        x = (x >> sh) << sh
                while x != 0:
                    b = _ctz(x, table)
                    x &= x - _ONE
                    v = w * 64 + b
                    common = 0
                    for z in range(words):
                        common += _popcount(rows[u, z] & rows[v, z])
                    if common < threshold:
                        rows[u, v >> 6] &= ~(_ONE << np.uint64(v & 63))
                        rows[v, u >> 6] &= ~(_ONE << np.uint64(u & 63))
                        changed = True
    return rows


def _edge_kcore_py(adj, threshold):
    adj = adj.copy()
    while True:
        a = adj.astype(np.float32)
        common = a @ a
        drop = adj & (common < threshold)
        if not drop.any():
            return adj
        adj &= ~drop


def edge_kcore_adj(adj: np.ndarray, threshold: int) -> np.ndarray:
    """Greatest subgraph in which every edge has >= ``threshold`` common neighbours."""
    adj = np.ascontiguousarray(adj, dtype=bool)
    n = adj.shape[0]
    if n == 0 or threshold <= 0:
        return adj.copy()
    if _accel.USE_JIT:
        rows = _edge_kcore_jit(pack_rows(adj).copy(), n, int(threshold), _DEBRUIJN_TABLE)
        return unpack_rows(rows, n)
    return _edge_kcore_py(adj, int(threshold))


# ---------------------------------------------------------------------------
# sequential greedy colouring in a given order


@njit(cache=True)
def _greedy_color_jit(adj, order):
    n = adj.shape[0]
    colors = np.full(n, -1, dtype=np.int64)
    stamp = np.zeros(n + 1, dtype=np.int64)
    for idx in range(order.shape[0]):
        v = order[idx]
        for u in range(n):
            if adj[v, u] and colors[u] >= 0:
                stamp[colors[u]] = v + 1
        c = 0
        while stamp[c] == v + 1:
            c += 1
        colors[v] = c
    return colors


def _greedy_color_py(adj, order):
    n = adj.shape[0]
    colors = np.full(n, -1, dtype=np.int64)
    for v in order:
        taken = np.zeros(n + 1, dtype=bool)
        used = colors[adj[v]]
        taken[used[used >= 0]] = True
        colors[v] = int(np.argmin(taken))
    return colors


def greedy_color(adj: np.ndarray, order: np.ndarray) -> np.ndarray:
    """Colour vertices in ``order`` with the smallest colour not used by a neighbour."""
    adj = np.ascontiguousarray(adj, dtype=bool)
    order = np.ascontiguousarray(order, dtype=np.int64)
    if _accel.USE_JIT:
        return _greedy_color_jit(adj, order)
    return _greedy_color_py(adj, order)


# ---------------------------------------------------------------------------
# multi-start greedy clique


@njit(cache=True)
def _greedy_clique_jit(adj, starts, uniforms):
    n = adj.shape[0]
    best = np.zeros(0, dtype=np.int64)
    cand = np.zeros(n, dtype=np.bool_)
    score = np.zeros(n, dtype=np.int64)
    for s in range(starts.shape[0]):
        v = starts[s]
        clique = np.empty(n, dtype=np.int64)
        clique[0] = v
        size = 1
        for u in range(n):
            cand[u] = adj[v, u]
        while True:
            top = -1
            nties = 0
            for u in range(n):
                if cand[u]:
                    c = 0
                    for w in range(n):
                        if cand[w] and adj[u, w]:
                            c += 1
                    score[u] = c
                    if c > top:
                        top = c
                        nties = 1
                    elif c == top:
                        nties += 1
            if top < 0:
                break
            k = 0
            if uniforms.shape[1] > 0 and nties > 1:
                k = int(uniforms[s, size - 1] * nties)
            pick = -1
            for u in range(n):
                if cand[u] and score[u] == top:
                    if k == 0:
                        pick = u
                        break
                    k -= 1
            clique[size] = pick
            size += 1
            for u in range(n):
                cand[u] = cand[u] and adj[pick, u]
        if size > best.shape[0]:
            best = clique[:size].copy()
    return best


def _greedy_clique_py(adj, starts, uniforms):
    best = np.zeros(0, dtype=np.int64)
    for s, v in enumerate(starts):
        clique = [int(v)]
        cand = adj[v].copy()
        while cand.any():
            idx = np.flatnonzero(cand)
            score = adj[np.ix_(idx, idx)].sum(axis=1)
            ties = idx[score == score.max()]
            k = int(uniforms[s, len(clique) - 1] * len(ties)) if uniforms.shape[1] and len(ties) > 1 else 0
            u = int(ties[k])
            clique.append(u)
            cand &= adj[u]
        if len(clique) > len(best):
            best = np.asarray(clique, dtype=np.int64)
    return best


def greedy_clique(adj: np.ndarray, starts: np.ndarray, uniforms: np.ndarray | None = None) -> np.ndarray:
    """Best clique over greedy extensions from each start vertex.

    Each step adds the candidate with most neighbours among the candidates.
    Ties go to the lowest index, or to tie number ``int(u * ties)`` when a
    (len(starts), n) array of uniforms is given.  Returns the clique in
    insertion order.
    """
    adj = np.ascontiguousarray(adj, dtype=bool)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    if uniforms is None:
        uniforms = np.zeros((starts.shape[0], 0))
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    if _accel.USE_JIT:
        return _greedy_clique_jit(adj, starts, uniforms)
    return _greedy_clique_py(adj, starts, uniforms)


# ---------------------------------------------------------------------------
# single-bit-flip Metropolis sweeps for a QUBO


@njit(cache=True)
def _anneal_jit(Qm, h, x0, temps, uniforms):
    R, n = x0.shape
    S = temps.shape[0]
    best_x = x0.copy()
    best_e = np.zeros(R)
    for r in range(R):
        x = x0[r].copy()
        field = h.copy()
        e = 0.0
        for i in range(n):
            if x[i]:
                e += h[i]
                for j in range(n):
                    field[j] += Qm[j, i]
        for i in range(n):
            if x[i]:
                for j in range(i + 1, n):
                    if x[j]:
                        e += Qm[i, j]
        be = e
        for j in range(n):
            best_x[r, j] = x[j]
        for s in range(S):
            t = temps[s]
            for i in range(n):
                delta = field[i] if x[i] == 0 else -field[i]
                if delta <= 0.0 or uniforms[r, s, i] < np.exp(-delta / t):
                    sign = 1.0 if x[i] == 0 else -1.0
                    x[i] = 1 - x[i]
                    e += delta
                    for j in range(n):
                        field[j] += sign * Qm[j, i]
                    if e < be:
                        be = e
                        for j in range(n):
                            best_x[r, j] = x[j]
        best_e[r] = be
    return best_x, best_e


def _anneal_py(Qm, h, x0, temps, uniforms):
    R, n = x0.shape
    x = x0.copy()
    xf = x.astype(np.float64)
    field = h[None, :] + xf @ Qm.T
    e = xf @ h + 0.5 * np.einsum("ri,ij,rj->r", xf, Qm, xf)
    best_x = x.copy()
    best_e = e.copy()
    rows = np.arange(R)
    for s in range(temps.shape[0]):
        t = temps[s]
        for i in range(n):
            xi = x[:, i]
            delta = np.where(xi == 0, field[:, i], -field[:, i])
            with np.errstate(over="ignore"):
                accept = (delta <= 0.0) | (uniforms[:, s, i] < np.exp(-delta / t))
            if not accept.any():
                continue
            sign = np.where(xi == 0, 1.0, -1.0) * accept
            x[accept, i] = 1 - x[accept, i]
            e = e + np.where(accept, delta, 0.0)
            field += sign[:, None] * Qm[:, i][None, :]
            better = e < best_e
            if better.any():
                best_e[better] = e[better]
                best_x[rows[better]] = x[better]
    return best_x, best_e


def anneal(Qm, h, x0, temps, uniforms):
    """Run Metropolis sweeps from each row of ``x0``; return best states and energies."""
    Qm = np.ascontiguousarray(Qm, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.int8)
    temps = np.ascontiguousarray(temps, dtype=np.float64)
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    if _accel.USE_JIT:
        return _anneal_jit(Qm, h, x0, temps, uniforms)
    return _anneal_py(Qm, h, x0, temps, uniforms)
