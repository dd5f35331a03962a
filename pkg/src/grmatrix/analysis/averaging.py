from __future__ import annotations

import numpy as np

from ..gmatrix import PageRankVector, power_iteration
from ..graph import NodeSubset
from ..reduced import ReducedMatrixSet


def average_reduced(rsets: list[ReducedMatrixSet]) -> ReducedMatrixSet:
    """Equal-weight mean of every component over several editions."""
    if not rsets:
        raise ValueError("nothing to average")
    first = rsets[0]
    for other in rsets[1:]:
        if other.names != first.names:
            raise ValueError(f"subset of {other.edition_tag or 'bundle'} differs "
                             f"from {first.edition_tag or 'first bundle'}")
        if other.alpha != first.alpha:
            raise ValueError(f"alpha mismatch: {other.alpha} vs {first.alpha}")
    mean = {c: np.mean([getattr(r, c) for r in rsets], axis=0) for c in first.COMPONENTS}
    lams = [r.lambda_c for r in rsets]
    lam = None if any(l is None for l in lams) else float(np.mean(lams))
    return ReducedMatrixSet(
        subset=NodeSubset(first.subset.indices, first.names),
        lambda_c=lam,
        alpha=first.alpha,
        edition_tag="average",
        tolerances={"averaged": [r.edition_tag for r in rsets],
                    "members": [r.tolerances for r in rsets]},
        **mean,
    )


def pagerank_of_reduced(rset_or_matrix, tol: float = 1e-13,
                        max_iter: int = 1_000_000, start=None) -> PageRankVector:
    """Stationary vector of GR by power iteration; GR is used undamped."""
    GR = getattr(rset_or_matrix, "GR", rset_or_matrix)
    GR = np.asarray(GR, dtype=float)
    n = GR.shape[0]
    v, residual, it, history = power_iteration(GR.__matmul__, n, tol, max_iter, start)
    return PageRankVector(v, residual=residual, iterations=it, residual_history=tuple(history))
