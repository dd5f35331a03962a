"""Directed network ingestion: edge lists, labels and node subsets."""

from __future__ import annotations

import logging
import re
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^#\s*nodes\s*=\s*(\d+)\s*$")
_MAX_ID = np.iinfo(np.int64).max


class GraphInputError(ValueError):
    """Raised for malformed or inconsistent input files."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _csr(keys: np.ndarray, values: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # keys/values already sorted lexicographically by (key, value)
    counts = np.bincount(keys, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, values.astype(np.int64, copy=False)


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Immutable directed network with dense internal ids ``0..n_nodes-1``.

    Adjacency is held twice in CSR form: ``out_indptr/out_indices`` lists the
    targets of each node, ``in_indptr/in_indices`` its sources. Both are
    sorted and duplicate free.
    """

    n_nodes: int
    out_indptr: np.ndarray
    out_indices: np.ndarray
    in_indptr: np.ndarray
    in_indices: np.ndarray
    external_ids: np.ndarray
    labels: Mapping[int, str] | None = None
    _by_external: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._by_external is None:
            lookup = {int(e): i for i, e in enumerate(self.external_ids)}
            if len(lookup) != self.n_nodes:
                raise GraphInputError("external ids are not unique")
            object.__setattr__(self, "_by_external", lookup)

    @classmethod
    def from_edges(cls, sources, targets, n_nodes=None, external_ids=None,
                   keep_self_loops=False) -> "DirectedGraph":
        """Build a graph from internal-id edge arrays.

        Duplicates are collapsed and self-loops dropped unless requested.
        """
        src = np.asarray(sources, dtype=np.int64).ravel()
        dst = np.asarray(targets, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("sources and targets differ in length")
        if n_nodes is None:
            n_nodes = int(max(src.max(initial=-1), dst.max(initial=-1))) + 1
        if src.size and (min(src.min(), dst.min()) < 0
                         or max(src.max(), dst.max()) >= n_nodes):
            raise GraphInputError("edge endpoint outside [0, n_nodes)")
        if not keep_self_loops:
            mask = src != dst
            src, dst = src[mask], dst[mask]
        if src.size:
            code = np.unique(src * n_nodes + dst)
            src, dst = code // n_nodes, code % n_nodes
        out_indptr, out_indices = _csr(src, dst, n_nodes)
        order = np.lexsort((src, dst))
        in_indptr, in_indices = _csr(dst[order], src[order], n_nodes)
        if external_ids is None:
            external_ids = np.arange(n_nodes, dtype=np.int64)
        return cls(
            n_nodes=int(n_nodes),
            out_indptr=_frozen(out_indptr),
            out_indices=_frozen(out_indices),
            in_indptr=_frozen(in_indptr),
            in_indices=_frozen(in_indices),
            external_ids=_frozen(np.asarray(external_ids, dtype=np.int64)),
        )

    @property
    def n_edges(self) -> int:
        return int(self.out_indices.size)

    def out_links(self, node: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[node]:self.out_indptr[node + 1]]

    def in_links(self, node: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[node]:self.in_indptr[node + 1]]

    @property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(sources, targets)`` sorted by source then target."""
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int64), self.out_degree)
        return src, np.asarray(self.out_indices)

    def internal_id(self, external_id: int) -> int:
        return self._by_external[int(external_id)]

    def has_external(self, external_id: int) -> bool:
        return int(external_id) in self._by_external

    def label(self, node: int) -> str:
        if self.labels and node in self.labels:
            return self.labels[node]
        return str(int(self.external_ids[node]))

    def with_labels(self, labels: Mapping[int, str]) -> "DirectedGraph":
        return replace(self, labels=dict(labels))

    def same_structure(self, other: "DirectedGraph") -> bool:
        return (self.n_nodes == other.n_nodes
                and np.array_equal(self.external_ids, other.external_ids)
                and np.array_equal(self.out_indptr, other.out_indptr)
                and np.array_equal(self.out_indices, other.out_indices))


@dataclass(frozen=True)
class NodeSubset:
    """Ordered node selection; its order is the row/column order of reduced matrices."""

    indices: tuple[int, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.names):
            raise ValueError("indices and names differ in length")
        if not self.indices:
            raise ValueError("subset is empty")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("subset contains duplicate nodes")

    def __len__(self) -> int:
        return len(self.indices)

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not in the subset") from None


def _scan_lines(path: Path, declared: int | None):
    """Slow line-by-line parse; used to pinpoint errors."""
    src, dst = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise GraphInputError(f"{path}:{lineno}: malformed edge line {line!r}")
            a, b = int(parts[0]), int(parts[1])
            limit = declared if declared is not None else _MAX_ID + 1
            if a >= limit or b >= limit:
                raise GraphInputError(f"{path}:{lineno}: node id overflow (limit {limit})")
            src.append(a)
            dst.append(b)
    return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)


def _read_header(path: Path) -> int | None:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if not s:
                continue
            m = _HEADER.match(s)
            if m:
                return int(m.group(1))
            if not s.startswith("#"):
                return None
    return None


def load_edge_list(path, keep_self_loops: bool = False) -> DirectedGraph:
    """Load a whitespace separated ``src dst`` edge list.

    Original ids may be sparse; they are remapped to ``0..N-1`` in ascending
    order of original id. A ``# nodes=<N>`` header declares ids ``0..N-1``
    as nodes even when they carry no edges.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"edge list not found: {path}")
    declared = _read_header(path)
    try:
        frame = pd.read_csv(path, sep=r"\s+", comment="#", header=None,
                            engine="c", dtype=np.int64)
        if frame.shape[1] != 2:
            raise ValueError
        src = frame[0].to_numpy()
        dst = frame[1].to_numpy()
        if src.size and min(src.min(), dst.min()) < 0:
            raise ValueError
        if declared is not None and src.size and max(src.max(), dst.max()) >= declared:
            raise ValueError
    except pd.errors.EmptyDataError:
        src = dst = np.empty(0, dtype=np.int64)
    except (ValueError, OverflowError, pd.errors.ParserError):
        src, dst = _scan_lines(path, declared)

    if src.size == 0 and not declared:
        raise GraphInputError(f"{path}: no edges found")

    if declared is not None:
        ext = np.arange(declared, dtype=np.int64)
        si, di = src, dst
    else:
        ext, inverse = np.unique(np.concatenate([src, dst]), return_inverse=True)
        si, di = inverse[:src.size], inverse[src.size:]
    g = DirectedGraph.from_edges(si, di, n_nodes=ext.size, external_ids=ext,
                                 keep_self_loops=keep_self_loops)
    logger.info("loaded %s: %d nodes, %d edges", path, g.n_nodes, g.n_edges)
    return g


def load_labels(path, graph: DirectedGraph) -> DirectedGraph:
    """Attach ``<original-id>\\t<title>`` labels; returns a new graph."""
    path = Path(path)
    labels: dict[int, str] = dict(graph.labels or {})
    owner: dict[str, int] = {t: i for i, t in labels.items()}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            ident, sep, title = line.partition("\t")
            title = title.strip()
            if not sep or not ident.strip().isdigit() or not title:
                raise GraphInputError(f"{path}:{lineno}: malformed label line {line!r}")
            ext = int(ident)
            if not graph.has_external(ext):
                warnings.warn(f"{path}:{lineno}: label for unknown node id {ext} ignored",
                              stacklevel=2)
                continue
            node = graph.internal_id(ext)
            if title in owner and owner[title] != node:
                other = int(graph.external_ids[owner[title]])
                raise GraphInputError(
                    f"{path}:{lineno}: title {title!r} mapped to ids {other} and {ext}")
            if node in labels and labels[node] != title:
                raise GraphInputError(
                    f"{path}:{lineno}: id {ext} labelled both {labels[node]!r} and {title!r}")
            labels[node] = title
            owner[title] = node
    return graph.with_labels(labels)


def resolve_subset(names_or_ids: Sequence, graph: DirectedGraph) -> NodeSubset:
    """Resolve titles, ``"@<id>"`` strings or integer original ids to a subset."""
    by_title = {t: i for i, t in (graph.labels or {}).items()}
    indices, names, misses = [], [], []
    for entry in names_or_ids:
        node = None
        if isinstance(entry, (int, np.integer)):
            if graph.has_external(entry):
                node = graph.internal_id(entry)
        elif isinstance(entry, str) and entry.startswith("@") and entry[1:].isdigit():
            if graph.has_external(int(entry[1:])):
                node = graph.internal_id(int(entry[1:]))
        else:
            node = by_title.get(entry)
        if node is None:
            misses.append(str(entry))
            continue
        indices.append(node)
        names.append(graph.label(node))
    if misses:
        raise GraphInputError("unresolved subset entries: " + ", ".join(misses))
    seen: set[int] = set()
    dups = [names[k] for k, i in enumerate(indices) if i in seen or seen.add(i)]
    if dups:
        raise GraphInputError("duplicate subset entries: " + ", ".join(dups))
    return NodeSubset(tuple(indices), tuple(names))


def read_subset_file(path) -> list[str]:
    """One title (or ``@<id>``) per line; blank lines and ``#`` comments skipped."""
    with open(path, encoding="utf-8") as fh:
        return [s for s in (line.strip() for line in fh) if s and not s.startswith("#")]


def subset_from_indices(indices: Iterable[int], graph: DirectedGraph) -> NodeSubset:
    idx = tuple(int(i) for i in indices)
    return NodeSubset(idx, tuple(graph.label(i) for i in idx))
