"""Logarithmic PageRank sensitivity of a reduced matrix to single-link weight changes."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..reduced import ReducedMatrixSet
from .averaging import pagerank_of_reduced

DEFAULT_DELTA = 0.01


@dataclass(frozen=True)
class SensitivityResult:
    perturbed_link: tuple[str, str]
    delta: float
    D: np.ndarray
    names: tuple[str, ...] = ()

    def __getitem__(self, name: str) -> float:
        return float(self.D[self.names.index(name)])


def perturb(GR: np.ndarray, target: int, source: int, delta: float) -> np.ndarray:
    """Scale GR[target, source] by ``1 + delta`` and renormalize that column."""
    G = np.array(GR, dtype=float)
    G[target, source] *= 1.0 + delta
    G[:, source] /= G[:, source].sum()
    return G


def log_derivative(GR, target: int, source: int, delta: float, base=None,
                   one_sided: bool = False) -> np.ndarray:
    """D(i) = dP(i) / (delta P(i)) for the link source -> target.

    The central estimate averages the +delta and -delta one-sided quotients.
    """
    GR = np.asarray(GR, dtype=float)
    P = pagerank_of_reduced(GR).probabilities if base is None else base
    if delta == 0 or GR[target, source] == 0:
        return np.zeros_like(P)
    up = pagerank_of_reduced(perturb(GR, target, source, delta), start=P).probabilities
    if one_sided:
        return (up - P) / (delta * P)
    down = pagerank_of_reduced(perturb(GR, target, source, -delta), start=P).probabilities
    return (up - down) / (2.0 * delta * P)


def _check_delta(delta):
    if not -1.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (-1, 1), got {delta}")


def sensitivity(rset: ReducedMatrixSet, link: tuple[str, str], delta: float = DEFAULT_DELTA,
                base=None) -> SensitivityResult:
    """Sensitivity of every node to the weight of the link ``p -> c``."""
    _check_delta(delta)
    p, c = link
    j, i = rset.subset.position(p), rset.subset.position(c)
    if delta != 0 and rset.GR[i, j] == 0:
        warnings.warn(f"GR entry for {p} -> {c} is zero; sensitivity is identically zero",
                      stacklevel=2)
    D = log_derivative(rset.GR, i, j, delta, base)
    return SensitivityResult((p, c), delta, D, rset.names)


def two_way_sensitivity(rset: ReducedMatrixSet, p: str, c: str, delta: float = DEFAULT_DELTA,
                        base=None) -> float:
    """D_{p->c}(c) + D_{c->p}(c)."""
    _check_delta(delta)
    j, i = rset.subset.position(p), rset.subset.position(c)
    if base is None:
        base = pagerank_of_reduced(rset.GR).probabilities
    forward = log_derivative(rset.GR, i, j, delta, base)[i]
    backward = log_derivative(rset.GR, j, i, delta, base)[i]
    return float(forward + backward)


def diagonal_sensitivity_matrix(rset: ReducedMatrixSet, ps: list[str], cs: list[str],
                                delta: float = DEFAULT_DELTA) -> np.ndarray:
    """Two-way sensitivities; row = c in ``cs``, column = p in ``ps``."""
    base = pagerank_of_reduced(rset.GR).probabilities
    out = np.zeros((len(cs), len(ps)))
    for a, c in enumerate(cs):
        for b, p in enumerate(ps):
            out[a, b] = two_way_sensitivity(rset, p, c, delta, base)
    return out
