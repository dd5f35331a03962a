"""Implicit Google matrix operator and PageRank by power iteration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import DirectedGraph

DEFAULT_ALPHA = 0.85


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


def transition_matrix(graph: DirectedGraph) -> sp.csr_matrix:
    """Sparse link part of S: entry (i, j) = 1/k_out(j) for each link j -> i.

    Dangling columns are left empty; the operator handles them separately.
    """
    src, dst = graph.edges()
    deg = graph.out_degree.astype(float)
    data = 1.0 / deg[src] if src.size else np.empty(0)
    return sp.csr_matrix((data, (dst, src)), shape=(graph.n_nodes, graph.n_nodes))


@dataclass(frozen=True, eq=False)
class StochasticOperator:
    """Column-stochastic Google operator G = alpha*S + (1 - alpha)/N, never densified.

    ``weights`` is the uniform row term every column contributes: column j adds
    ``weights[j] * v[j]`` to each node, where ``weights[j] = (alpha*[j dangling]
    + 1 - alpha)/N``.
    """

    graph: DirectedGraph
    alpha: float = DEFAULT_ALPHA
    links: sp.csr_matrix = field(init=False, repr=False)
    dangling: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        n = self.graph.n_nodes
        dangling = self.graph.out_degree == 0
        object.__setattr__(self, "links", transition_matrix(self.graph))
        object.__setattr__(self, "dangling", dangling)
        object.__setattr__(self, "weights",
                           (self.alpha * dangling + (1.0 - self.alpha)) / n)

    @property
    def n(self) -> int:
        return self.graph.n_nodes

    @property
    def inverse_out_degree(self) -> np.ndarray:
        deg = self.graph.out_degree.astype(float)
        out = np.zeros_like(deg)
        np.divide(1.0, deg, out=out, where=deg > 0)
        return out

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValueError(f"vector length {v.shape} does not match N={self.n}")
        w = self.alpha * (self.links @ v)
        w += self.weights @ v
        return w

    def apply_transpose(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise ValueError(f"vector length {y.shape} does not match N={self.n}")
        return self.alpha * (self.links.T @ y) + self.weights * y.sum()

    def dense(self) -> np.ndarray:
        """Materialize G; only sensible for small graphs."""
        return self.alpha * self.links.toarray() + self.weights[np.newaxis, :]


@dataclass(frozen=True)
class PageRankVector:
    probabilities: np.ndarray
    residual: float = 0.0
    iterations: int = 0
    residual_history: tuple[float, ...] = ()
    k_index: np.ndarray = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "k_index", rank_order(p))

    def __len__(self) -> int:
        return self.probabilities.size


def rank_order(p) -> np.ndarray:
    """Indices by decreasing value, ties broken by ascending index."""
    p = np.asarray(p)
    return np.lexsort((np.arange(p.size), -p))


def power_iteration(step, n, tol, max_iter, start=None):
    """Iterate ``v <- step(v)`` from the uniform vector until the L1 change is below tol.

    Returns ``(v, residual, iterations, history)``. ``step`` must preserve
    total mass for the L1 residual to be meaningful.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    v = np.full(n, 1.0 / n) if start is None else np.asarray(start, dtype=float)
    history = []
    residual = float("inf")
    for it in range(1, max_iter + 1):
        w = step(v)
        w /= w.sum()
        residual = float(np.abs(w - v).sum())
        history.append(residual)
        v = w
        if residual <= tol:
            return v, residual, it, history
    raise ConvergenceError("power iteration did not converge", residual, max_iter)


def pagerank(op: StochasticOperator, tol: float = 1e-12, max_iter: int = 10_000) -> PageRankVector:
    v, residual, it, history = power_iteration(op.apply, op.n, tol, max_iter)
    return PageRankVector(v, residual=residual, iterations=it,
                          residual_history=tuple(history))


def rank_nodes(pr: PageRankVector, graph: DirectedGraph | None = None):
    """Rows ``(K, internal_id, original_id, label, probability)`` with K from 1."""
    rows = []
    for k, node in enumerate(pr.k_index, 1):
        node = int(node)
        if graph is None:
            ext, label = node, str(node)
        else:
            ext, label = int(graph.external_ids[node]), graph.label(node)
        rows.append((k, node, ext, label, float(pr.probabilities[node])))
    return rows
