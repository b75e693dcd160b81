"""QUBO model of maximum clique, exact and annealing-based minimisation."""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .graph import Graph

BRUTE_FORCE_CAP = 24


@dataclass(frozen=True)
class Qubo:
    """E(x) = sum_i linear[i] x_i + sum_{i<j} quadratic[(i, j)] x_i x_j, x binary."""

    n: int
    linear: np.ndarray
    quadratic: dict = field(default_factory=dict)

    def __post_init__(self):
        lin = np.array(self.linear, dtype=np.float64, copy=True).reshape(-1)
        if lin.shape != (self.n,):
            raise ValueError("linear coefficient vector has wrong length")
        quad: dict[tuple[int, int], float] = {}
        for (i, j), c in self.quadratic.items():
            i, j = int(i), int(j)
            if i == j:
                raise ValueError("diagonal quadratic term; fold it into the linear part")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"variable pair ({i}, {j}) out of range")
            key = (i, j) if i < j else (j, i)
            quad[key] = quad.get(key, 0.0) + float(c)
        quad = {k: v for k, v in sorted(quad.items()) if v != 0.0}
        lin.flags.writeable = False
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)

    def matrix(self) -> np.ndarray:
        """Symmetric coupling matrix with zero diagonal (each a_ij stored twice)."""
        Qm = np.zeros((self.n, self.n))
        for (i, j), c in self.quadratic.items():
            Qm[i, j] = Qm[j, i] = c
        return Qm

    def upper_matrix(self) -> np.ndarray:
        Qm = np.zeros((self.n, self.n))
        for (i, j), c in self.quadratic.items():
            Qm[i, j] = c
        return Qm

    def max_abs_coefficient(self) -> float:
        vals = [abs(c) for c in self.quadratic.values()] + [float(np.abs(self.linear).max(initial=0.0))]
        return max(vals)


def maxclique_to_qubo(graph: Graph, A: float = 1.0, B: float = 2.0) -> Qubo:
    """-A on every vertex, +B on every non-adjacent pair."""
    if A <= 0 or B <= 0:
        raise ValueError("A and B must be positive")
    if B / A < 2:
        warnings.warn(
            f"B/A = {B / A:g} < 2: minimisers need not be maximum cliques", RuntimeWarning, stacklevel=2
        )
    n = graph.n
    iu, ju = np.nonzero(np.triu(~graph.adj, 1))
    return Qubo(n, np.full(n, -float(A)), {(int(i), int(j)): float(B) for i, j in zip(iu, ju)})


def energy(qubo: Qubo, x) -> float:
    x = np.asarray(x)
    if x.shape != (qubo.n,):
        raise ValueError(f"assignment has length {x.size}, QUBO has {qubo.n} variables")
    e = float(np.dot(qubo.linear, x))
    for (i, j), c in qubo.quadratic.items():
        if x[i] and x[j]:
            e += c
    return e


def _energies_chunk(qubo: Qubo, Qu: np.ndarray, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    n = qubo.n
    k = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    bits = ((k[:, None] >> shifts[None, :]) & 1).astype(np.float64)
    e = bits @ qubo.linear + np.einsum("ki,ki->k", bits @ Qu, bits)
    return bits, e


def _enumerate(qubo: Qubo, cap: int, chunk: int = 1 << 16):
    if qubo.n > cap:
        raise ValueError(f"brute force limited to {cap} variables, got {qubo.n}")
    Qu = qubo.upper_matrix()
    total = 1 << qubo.n
    for start in range(0, total, chunk):
        yield _energies_chunk(qubo, Qu, start, min(total, start + chunk))


def brute_force_solve(qubo: Qubo, cap: int = BRUTE_FORCE_CAP) -> tuple[np.ndarray, float]:
    """Exhaustive minimum; ties go to the lexicographically smallest assignment."""
    best_e = np.inf
    best_x = np.zeros(qubo.n, dtype=np.int8)
    for bits, e in _enumerate(qubo, cap):
        i = int(np.argmin(e))
        if e[i] < best_e:
            best_e = float(e[i])
            best_x = bits[i].astype(np.int8)
    return best_x, best_e


def brute_force_minima(qubo: Qubo, cap: int = BRUTE_FORCE_CAP) -> tuple[np.ndarray, float]:
    """All minimisers (rows, lexicographic order) and the minimum energy."""
    best_e = np.inf
    found: list[np.ndarray] = []
    for bits, e in _enumerate(qubo, cap):
        lo = float(e.min())
        if lo < best_e:
            best_e = lo
            found = []
        if lo == best_e:
            found.append(bits[e == lo].astype(np.int8))
    return np.concatenate(found) if found else np.zeros((0, qubo.n), dtype=np.int8), best_e


def geometric_schedule(t0: float, tf: float, sweeps: int) -> np.ndarray:
    if sweeps == 1:
        return np.array([tf])
    return t0 * (tf / t0) ** (np.arange(sweeps) / (sweeps - 1))


def simulated_annealing_solve(
    qubo: Qubo,
    sweeps: int = 1000,
    restarts: int = 4,
    seed=0,
    schedule: tuple[float, float] | None = None,
) -> tuple[np.ndarray, float]:
    """Best state over ``restarts`` Metropolis runs with a geometric cooling schedule.

    ``schedule`` is (T_start, T_end); by default T_start is the largest
    absolute coefficient and T_end = 0.01.
    """
    if sweeps < 1 or restarts < 1:
        raise ValueError("sweeps and restarts must be >= 1")
    n = qubo.n
    if n == 0:
        return np.zeros(0, dtype=np.int8), 0.0
    if schedule is None:
        t0 = max(qubo.max_abs_coefficient(), 0.01)
        schedule = (t0, 0.01)
    t0, tf = schedule
    temps = geometric_schedule(float(t0), float(tf), sweeps)
    rng = np.random.default_rng(seed)
    x0 = rng.integers(0, 2, size=(restarts, n), dtype=np.int8)
    uniforms = rng.random((restarts, sweeps, n))
    best_x, best_e = kernels.anneal(qubo.matrix(), qubo.linear, x0, temps, uniforms)
    r = int(np.argmin(best_e))
    x = best_x[r].astype(np.int8)
    e = energy(qubo, x)
    if e > 0.0:
        x = np.zeros(n, dtype=np.int8)
        e = 0.0
    return x, e


# ---------------------------------------------------------------------------
# text format: first line n, then "i coeff" and "i j coeff" lines (0-based)


def format_qubo(qubo: Qubo) -> str:
    out = io.StringIO()
    out.write(f"{qubo.n}\n")
    for i, c in enumerate(qubo.linear):
        if c != 0.0:
            out.write(f"{i} {c:.17g}\n")
    for (i, j), c in qubo.quadratic.items():
        out.write(f"{i} {j} {c:.17g}\n")
    return out.getvalue()


def parse_qubo(text: str) -> Qubo:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty QUBO text")
    n = int(lines[0][0])
    lin = np.zeros(n)
    quad: dict[tuple[int, int], float] = {}
    for parts in lines[1:]:
        if len(parts) == 2:
            lin[int(parts[0])] += float(parts[1])
        elif len(parts) == 3:
            key = (int(parts[0]), int(parts[1]))
            quad[key] = quad.get(key, 0.0) + float(parts[2])
        else:
            raise ValueError(f"bad QUBO line: {' '.join(parts)}")
    return Qubo(n, lin, quad)


def write_qubo(qubo: Qubo, path) -> None:
    Path(path).write_text(format_qubo(qubo))


def read_qubo(path) -> Qubo:
    return parse_qubo(Path(path).read_text())
