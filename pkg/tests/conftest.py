import sys
from pathlib import Path

import numpy as np
import pytest

from grmatrix.graph import DirectedGraph, subset_from_indices

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"


def random_edges(rng, n, dangling_fraction=0.2, mean_degree=3.0):
    """Random directed edge list with a controlled share of dangling nodes."""
    n_dangling = int(round(dangling_fraction * n))
    dangling = set(rng.choice(n, n_dangling, replace=False).tolist()) if n_dangling else set()
    edges = set()
    for s in range(n):
        if s in dangling:
            continue
        k = max(1, rng.poisson(mean_degree))
        for d in rng.choice(n, min(k, n), replace=False):
            if d != s:
                edges.add((s, int(d)))
    return sorted(edges)


def random_graph(rng, n, **kw):
    edges = random_edges(rng, n, **kw)
    src = [s for s, _ in edges]
    dst = [d for _, d in edges]
    return DirectedGraph.from_edges(src, dst, n_nodes=n), edges


def random_case(seed, n_max=200, nr_range=(2, 20)):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(25, n_max + 1))
    g, edges = random_graph(rng, n, dangling_fraction=float(rng.uniform(0, 0.5)))
    nr = int(rng.integers(nr_range[0], nr_range[1] + 1))
    subset = subset_from_indices(rng.choice(n, nr, replace=False), g)
    return g, edges, subset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return _write


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
