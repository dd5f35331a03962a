"""Reduced Google matrix of a node subset and its direct/projector/hidden split.

Nodes are ordered as (subset r, complement s) so that
``G = [[G_rr, G_rs], [G_sr, G_ss]]`` acts on column probability vectors and

    GR = G_rr + G_rs (1 - G_ss)^-1 G_sr.

With ``lambda_c, psi_R, psi_L`` the leading eigen-triple of ``G_ss``,
``P_c = psi_R psi_L^T / (psi_L . psi_R)`` and ``Q_c = 1 - P_c``, the inverse
splits into ``P_c / (1 - lambda_c) + Q_c sum_l (Q_c G_ss Q_c)^l Q_c`` which
gives ``GR = Grr + Gpr + Gqr``. The second term isolates the nearly singular
direction of ``1 - G_ss``; the series converges at the rate of the second
eigenvalue of ``G_ss``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .gmatrix import DEFAULT_ALPHA, ConvergenceError, StochasticOperator
from .graph import DirectedGraph, NodeSubset

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000
NEGATIVE_FLAG = -1e-8


@dataclass(frozen=True)
class ReductionConfig:
    eigen_tol: float = 1e-12
    eigen_max_iter: int = 10_000
    series_tol: float = 1e-12
    series_max_iter: int = 10_000
    threads: int = 1
    block_size: int = 32

    def __post_init__(self):
        if min(self.eigen_tol, self.series_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.threads < 1 or self.block_size < 1:
            raise ValueError("threads and block_size must be >= 1")


@dataclass(eq=False)
class ReducedMatrixSet:
    """Nr x Nr reduced matrices; column index = source node, row = destination."""

    subset: NodeSubset
    GR: np.ndarray
    Grr: np.ndarray
    Gpr: np.ndarray
    Gqrd: np.ndarray
    Gqrnd: np.ndarray
    lambda_c: float | None
    alpha: float
    edition_tag: str = ""
    tolerances: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    COMPONENTS = ("GR", "Grr", "Gpr", "Gqrd", "Gqrnd")

    @property
    def names(self) -> tuple[str, ...]:
        return self.subset.names

    @property
    def n(self) -> int:
        return len(self.subset)

    @property
    def Gqr(self) -> np.ndarray:
        return self.Gqrd + self.Gqrnd

    def component(self, name: str) -> np.ndarray:
        if name == "Gqr":
            return self.Gqr
        if "+" in name:
            return sum(self.component(part.strip()) for part in name.split("+"))
        if name not in self.COMPONENTS:
            raise KeyError(f"unknown component {name!r}")
        return getattr(self, name)

    def check(self, stochastic_tol=1e-8, closure_tol=1e-10) -> list[str]:
        """Return a list of violated invariants (empty when valid)."""
        problems = []
        cols = self.GR.sum(axis=0)
        if np.abs(cols - 1.0).max() > stochastic_tol:
            problems.append(f"GR column sums off by {np.abs(cols - 1).max():.3e}")
        parts = self.Grr + self.Gpr + self.Gqrd + self.Gqrnd
        if np.abs(parts - self.GR).max() > closure_tol:
            problems.append(f"decomposition gap {np.abs(parts - self.GR).max():.3e}")
        if np.any(self.Gqrd != np.diag(np.diag(self.Gqrd))):
            problems.append("Gqrd is not diagonal")
        if np.any(np.diag(self.Gqrnd) != 0):
            problems.append("Gqrnd has a non-zero diagonal")
        for name in ("GR", "Grr", "Gpr"):
            if getattr(self, name).min() < 0:
                problems.append(f"{name} has negative entries")
        if self.lambda_c is not None and not 0 < self.lambda_c < 1:
            problems.append(f"lambda_c={self.lambda_c} outside (0, 1)")
        return problems


def _split_hidden(Gqr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = np.diag(np.diag(Gqr))
    nd = Gqr - d
    np.fill_diagonal(nd, 0.0)
    return d, nd


def _complement(n: int, subset: NodeSubset) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[list(subset.indices)] = False
    return np.flatnonzero(mask)


class _Blocks:
    """Implicit block actions of G for the (r, s) partition.

    Every block entry carries the uniform column term ``weights[j]`` (teleport
    plus dangling), so off-diagonal blocks get it as well.
    """

    def __init__(self, op: StochasticOperator, subset: NodeSubset):
        self.alpha = op.alpha
        self.r = np.asarray(subset.indices, dtype=np.int64)
        self.s = _complement(op.n, subset)
        links = op.links
        rows_r, rows_s = links[self.r], links[self.s]
        self.W_rr = rows_r[:, self.r]
        self.W_rs = rows_r[:, self.s].tocsr()
        self.W_sr = rows_s[:, self.r].tocsc()
        self.W_ss = rows_s[:, self.s].tocsr()
        self.W_ss_T = self.W_ss.T.tocsr()
        self.w_r = op.weights[self.r]
        self.w_s = op.weights[self.s]

    @property
    def ns(self) -> int:
        return self.s.size

    def G_rr(self) -> np.ndarray:
        return self.alpha * self.W_rr.toarray() + self.w_r[np.newaxis, :]

    def G_ss(self, x):
        return self.alpha * (self.W_ss @ x) + self.w_s @ x

    def G_ss_T(self, y):
        return self.alpha * (self.W_ss_T @ y) + np.multiply.outer(self.w_s, y.sum(axis=0))

    def G_rs(self, y):
        return self.alpha * (self.W_rs @ y) + self.w_s @ y

    def G_sr_columns(self, cols) -> np.ndarray:
        block = self.alpha * self.W_sr[:, cols].toarray()
        block += self.w_r[cols][np.newaxis, :]
        return block

    def G_sr_T(self, y):
        return self.alpha * (self.W_sr.T @ y) + self.w_r * y.sum()


def _leading(action, n, tol, max_iter, what):
    psi = np.full(n, 1.0 / n)
    residual = float("inf")
    for it in range(1, max_iter + 1):
        w = action(psi)
        lam = float(w.sum())
        residual = float(np.abs(w - lam * psi).sum())
        if residual <= tol:
            return lam, psi, it
        if not lam > 0:
            raise ConvergenceError(f"{what}: vanishing iterate", residual, it)
        psi = w / lam
    raise ConvergenceError(f"{what} did not converge", residual, max_iter)


def _leading_eigen(blocks: _Blocks, tol, max_iter):
    lam_r, psi_r, it_r = _leading(blocks.G_ss, blocks.ns, tol, max_iter,
                                  "right eigenvector of G_ss")
    lam_l, psi_l, it_l = _leading(blocks.G_ss_T, blocks.ns, tol, max_iter,
                                  "left eigenvector of G_ss")
    if abs(lam_r - lam_l) > 10 * tol + 1e-12:
        raise ConvergenceError(
            f"left/right leading eigenvalues disagree ({lam_r!r} vs {lam_l!r})",
            abs(lam_r - lam_l), max(it_r, it_l))
    # two-sided Rayleigh quotient
    lam = float(psi_l @ blocks.G_ss(psi_r) / (psi_l @ psi_r))
    if not 0.0 < lam < 1.0:
        raise ConvergenceError(f"leading eigenvalue {lam} outside (0, 1)", 0.0, it_r)
    logger.debug("lambda_c=%.15f (%d/%d iterations)", lam, it_r, it_l)
    return lam, psi_r, psi_l


def complement_leading_eigen(graph: DirectedGraph, subset: NodeSubset,
                             alpha: float = DEFAULT_ALPHA, tol: float = 1e-12,
                             max_iter: int = 10_000, op: StochasticOperator | None = None):
    """Leading eigenvalue and L1-normalized right/left eigenvectors of G_ss."""
    op = op or StochasticOperator(graph, alpha)
    blocks = _Blocks(op, subset)
    if blocks.ns == 0:
        raise ValueError("complement is empty")
    return _leading_eigen(blocks, tol, max_iter)


def _hidden_columns(blocks: _Blocks, psi_r, psi_l, cols, tol, max_iter):
    norm = psi_l @ psi_r

    def project(v):
        return v - np.multiply.outer(psi_r, (psi_l @ v) / norm)

    v = project(blocks.G_sr_columns(cols))
    total = np.zeros_like(v)
    active = np.ones(len(cols), dtype=bool)
    for it in range(max_iter + 1):
        total[:, active] += v[:, active]
        active &= np.abs(v).sum(axis=0) >= tol
        if not active.any():
            return blocks.G_rs(total)
        v[:, ~active] = 0.0
        v = project(blocks.G_ss(v))
    worst = float(np.abs(v).sum(axis=0).max())
    raise ConvergenceError("hidden-component series did not converge", worst, max_iter)


def reduce(graph: DirectedGraph, subset: NodeSubset, alpha: float = DEFAULT_ALPHA,
           cfg: ReductionConfig | None = None, edition_tag: str = "",
           op: StochasticOperator | None = None) -> ReducedMatrixSet:
    """Reduced Google matrix of ``subset`` with its component split."""
    cfg = cfg or ReductionConfig()
    op = op or StochasticOperator(graph, alpha)
    nr = len(subset)
    if not 1 <= nr <= graph.n_nodes:
        raise ValueError(f"subset size {nr} outside [1, {graph.n_nodes}]")
    blocks = _Blocks(op, subset)
    tolerances = asdict(cfg)
    Grr = blocks.G_rr()
    zeros = np.zeros((nr, nr))
    if blocks.ns == 0:
        return ReducedMatrixSet(subset, Grr.copy(), Grr, zeros, zeros.copy(), zeros.copy(),
                                None, op.alpha, edition_tag, tolerances)

    lam, psi_r, psi_l = _leading_eigen(blocks, cfg.eigen_tol, cfg.eigen_max_iter)
    norm = psi_l @ psi_r
    Gpr = np.outer(blocks.G_rs(psi_r), blocks.G_sr_T(psi_l)) / (norm * (1.0 - lam))

    chunks = [list(range(k, min(k + cfg.block_size, nr)))
              for k in range(0, nr, cfg.block_size)]

    def run(cols):
        return _hidden_columns(blocks, psi_r, psi_l, cols, cfg.series_tol, cfg.series_max_iter)

    if cfg.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    Gqr = np.hstack(parts)

    Gqrd, Gqrnd = _split_hidden(Gqr)
    GR = Grr + Gpr + Gqrd + Gqrnd
    result = ReducedMatrixSet(subset, GR, Grr, Gpr, Gqrd, Gqrnd, lam, op.alpha,
                              edition_tag, tolerances)
    if Gqr.min() < NEGATIVE_FLAG:
        result.flags.append(f"Gqr has entries down to {Gqr.min():.3e}")
    return result


def dense_oracle_reduce(graph: DirectedGraph, subset: NodeSubset,
                        alpha: float = DEFAULT_ALPHA, edition_tag: str = "") -> ReducedMatrixSet:
    """Reference reduction via dense block solves and a dense spectral projector."""
    if graph.n_nodes > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to N <= {DENSE_LIMIT}, got {graph.n_nodes}")
    op = StochasticOperator(graph, alpha)
    G = op.dense()
    r = np.asarray(subset.indices)
    s = _complement(graph.n_nodes, subset)
    nr = r.size
    Grr = G[np.ix_(r, r)]
    zeros = np.zeros((nr, nr))
    if s.size == 0:
        return ReducedMatrixSet(subset, Grr.copy(), Grr, zeros, zeros.copy(), zeros.copy(),
                                None, alpha, edition_tag, {"method": "dense"})
    Grs, Gsr, Gss = G[np.ix_(r, s)], G[np.ix_(s, r)], G[np.ix_(s, s)]
    eye = np.eye(s.size)
    GR = Grr + Grs @ np.linalg.solve(eye - Gss, Gsr)

    vals, vecs = np.linalg.eig(Gss)
    lead = int(np.argmax(vals.real))
    lam = float(vals[lead].real)
    psi_r = np.abs(vecs[:, lead].real)
    lvals, lvecs = np.linalg.eig(Gss.T)
    psi_l = np.abs(lvecs[:, int(np.argmax(lvals.real))].real)
    P = np.outer(psi_r, psi_l) / (psi_l @ psi_r)
    Q = eye - P
    Gpr = Grs @ P @ Gsr / (1.0 - lam)
    Gqr = Grs @ Q @ np.linalg.solve(eye - Q @ Gss @ Q, Q @ Gsr)
    Gqrd, Gqrnd = _split_hidden(Gqr)
    return ReducedMatrixSet(subset, GR, Grr, Gpr, Gqrd, Gqrnd, lam, alpha, edition_tag,
                            {"method": "dense"})


def restricted_pagerank(probabilities, subset: NodeSubset) -> np.ndarray:
    """Global PageRank restricted to the subset and renormalized to sum 1."""
    p = np.asarray(probabilities)[list(subset.indices)]
    return p / p.sum()


__all__ = ["ReductionConfig", "ReducedMatrixSet", "reduce", "dense_oracle_reduce",
           "complement_leading_eigen", "restricted_pagerank", "DENSE_LIMIT"]
