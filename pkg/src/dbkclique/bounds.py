"""Upper and lower bounds on the clique number."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import kernels
from .graph import Graph, density


class BoundRefused(RuntimeError):
    """A bound declined to run (graph too large, solver did not converge)."""


@dataclass(frozen=True)
class BoundResult:
    value: int
    kind: Literal["upper", "lower"]
    method: str
    witness: np.ndarray | None = None
    estimate: float | None = None  # real-valued quantity behind the integer bound, if any


def _coloring_order(graph: Graph) -> np.ndarray:
    return np.argsort(-graph.degrees, kind="stable")


def greedy_coloring_ub(graph: Graph) -> BoundResult:
    """Colours used by greedy sequential colouring, largest degree first."""
    if graph.n == 0:
        return BoundResult(0, "upper", "greedy-coloring")
    colors = kernels.greedy_color(graph.adj, _coloring_order(graph))
    return BoundResult(int(colors.max()) + 1, "upper", "greedy-coloring")


def dense_edge_ub(graph: Graph) -> BoundResult:
    """Largest c with c(c-1)/2 <= m."""
    m = graph.m
    c = (1 + math.isqrt(1 + 8 * m)) // 2
    return BoundResult(c, "upper", "dense-edge")


def dense_edge_applicable(graph: Graph, threshold: float = 0.8) -> bool:
    return density(graph) > threshold


# ---------------------------------------------------------------------------
# Lovasz theta of the complement


@dataclass(frozen=True)
class ThetaSolution:
    upper: float  # certified: lambda_max of a dual-feasible matrix
    lower: float  # certified: objective of a feasible primal matrix
    iterations: int
    converged: bool


def _eig_slack(M: np.ndarray) -> float:
    return 8.0 * M.shape[0] * np.finfo(float).eps * float(np.linalg.norm(M))


def _sum_slack(M: np.ndarray) -> float:
    return M.size * np.finfo(float).eps * float(np.abs(M).sum())


def theta_complement(
    graph: Graph,
    tol: float = 1e-3,
    max_iter: int = 5000,
    rho: float | None = None,
    integral: bool = False,
    decide: int | None = None,
) -> ThetaSolution:
    """Lovasz number of the complement of ``graph`` by ADMM.

    Primal: maximise <J, X> subject to tr X = 1, X_ij = 0 for every
    non-edge ij of ``graph``, X PSD.  Any symmetric matrix that is 1 on the
    diagonal and on the edges of ``graph`` (free elsewhere) has a largest
    eigenvalue >= theta, so the dual iterate gives a certified upper value.

    Shifting the primal iterate by its most negative eigenvalue and
    renormalising the trace gives a feasible matrix, hence a certified lower
    value; a greedy clique seeds it.  The solve has converged when the upper
    value is within ``tol`` of either that certified value or of the primal
    objective of an iterate whose primal residual is below ``tol``.  With ``integral=True`` it also
    stops as soon as ``floor(upper + tol)`` can no longer change.

    ``decide=k`` stops once it is settled whether ``floor(theta + tol) <= k``;
    the returned upper value is still certified but may be loose.
    """
    n = graph.n
    if n == 0:
        return ThetaSolution(0.0, 0.0, 0, True)
    if n == 1:
        return ThetaSolution(1.0, 1.0, 0, True)
    off = ~graph.adj & ~np.eye(n, dtype=bool)  # entries forced to zero
    J = np.ones((n, n))
    rho = float(n) if rho is None else rho
    Z = np.eye(n) / n
    U = np.zeros((n, n))
    best_upper = math.inf
    # a clique C gives the feasible point 1_C 1_C^T / |C| of objective |C|
    best_lower = float(greedy_clique_lb(graph).value)
    it = 0
    for it in range(1, max_iter + 1):
        # X-step: projection onto {tr X = 1, X_ij = 0 on non-edges}
        X = Z - U + J / rho
        X[off] = 0.0
        X[np.diag_indices(n)] += (1.0 - np.trace(X)) / n
        # Z-step: projection onto the PSD cone
        V = X + U
        V = 0.5 * (V + V.T)
        w, Q = np.linalg.eigh(V)
        w = np.maximum(w, 0.0)
        Z_old = Z
        Z = (Q * w) @ Q.T
        U = U + X - Z
        if it % 10 == 0 or it == max_iter:
            A = J.copy()
            A[off] = rho * U[off]
            # eigvalsh is backward stable; pad by a bound on its rounding error
            best_upper = min(best_upper, float(np.linalg.eigvalsh(0.5 * (A + A.T))[-1]) + _eig_slack(A))
            # (X + mu I) / (1 + n mu) is primal feasible for mu >= -lambda_min(X)
            mu = max(0.0, -float(np.linalg.eigvalsh(0.5 * (X + X.T))[0]) + _eig_slack(X))
            best_lower = max(best_lower, (float(X.sum()) - _sum_slack(X) + n * mu) / (1.0 + n * mu))
            r_primal = np.linalg.norm(X - Z)
            if best_upper - best_lower <= tol or (best_upper - float(X.sum()) <= 0.1 * tol and r_primal <= 0.1 * tol):
                return ThetaSolution(best_upper, best_lower, it, True)
            if decide is not None and math.floor(best_upper + tol) <= decide:
                return ThetaSolution(best_upper, best_lower, it, True)
            level = decide + 1 if decide is not None else math.floor(best_upper + tol) if integral else None
            if level is not None and best_lower > level - tol:
                return ThetaSolution(best_upper, best_lower, it, True)
            # residual balancing
            r_dual = rho * np.linalg.norm(Z - Z_old)
            if r_primal > 10 * r_dual:
                rho *= 2.0
                U /= 2.0
            elif r_dual > 10 * r_primal:
                rho /= 2.0
                U *= 2.0
    return ThetaSolution(best_upper, best_lower, it, False)


def lovasz_theta_ub(
    graph: Graph,
    tol: float = 1e-3,
    cutoff: int = 60,
    max_iter: int = 5000,
    decide: int | None = None,
) -> BoundResult:
    """floor(theta(complement) + tol) from a certified over-estimate of theta.

    With ``decide=k`` the solver may stop early once the answer to
    ``bound <= k`` is known; the value returned is then valid but not tight.
    """
    if graph.n > cutoff:
        raise BoundRefused(f"graph has {graph.n} vertices, Lovasz cutoff is {cutoff}")
    sol = theta_complement(graph, tol=tol, max_iter=max_iter, integral=True, decide=decide)
    if not sol.converged:
        raise BoundRefused(f"theta solver did not reach gap {tol} in {max_iter} iterations")
    return BoundResult(int(math.floor(sol.upper + tol)), "upper", "lovasz", estimate=sol.upper)


# ---------------------------------------------------------------------------
# lower bound


def greedy_clique_lb(graph: Graph, seed=None, starts: int = 8) -> BoundResult:
    """Multi-start greedy clique.

    Start vertices are the last ``starts`` vertices of the degeneracy
    (peeling) order.  Each start is extended by the candidate with most
    neighbours inside the current candidate set; ties are broken at random
    when a seed/generator is given, otherwise by lowest index.
    """
    n = graph.n
    if n == 0:
        return BoundResult(0, "lower", "greedy-clique", np.zeros(0, dtype=np.int64))
    if seed is None or hasattr(seed, "integers"):
        rng = seed
    else:
        rng = np.random.default_rng(seed)
    _, order = kernels.core_peel(graph.adj)
    starts = order[::-1][:starts]
    uniforms = rng.random((len(starts), n)) if rng is not None else None
    best = kernels.greedy_clique(graph.adj, starts, uniforms)
    witness = np.sort(np.asarray(best, dtype=np.int64))
    return BoundResult(len(best), "lower", "greedy-clique", witness)
