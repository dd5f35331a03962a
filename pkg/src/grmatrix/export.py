"""File formats: rank/theta/sensitivity CSVs, matrix bundles, GEXF and DOT."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .analysis.friends import FriendshipGraph
from .analysis.ranking import EditionRankTable, ThetaScore
from .graph import GraphInputError, NodeSubset
from .reduced import ReducedMatrixSet


def fmt(x: float) -> str:
    """17 significant digits: enough for an exact float64 round-trip."""
    return f"{x:.17g}"


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_ranks(path, rows) -> None:
    """rows as produced by ``rank_nodes``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["K", "original_id", "title", "probability"])
        for k, _, ext, title, p in rows:
            w.writerow([k, ext, title, fmt(p)])


def write_local_ranks(path, table: EditionRankTable, graph, subset: NodeSubset, pr) -> None:
    global_k = np.empty(len(pr), dtype=np.int64)
    global_k[pr.k_index] = np.arange(1, len(pr) + 1)
    by_name = dict(zip(subset.names, subset.indices))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["local_rank", "K", "original_id", "title", "probability"])
        for name in table.ordered():
            node = by_name[name]
            w.writerow([table.entries[name], int(global_k[node]),
                        int(graph.external_ids[node]), name, fmt(pr.probabilities[node])])


def read_rank_table(path, edition_tag: str | None = None) -> EditionRankTable:
    """Read a local-rank CSV (``local_rank``/``rank`` and ``title``/``name`` columns)."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        rank_col = next((c for c in ("local_rank", "rank") if c in fields), None)
        name_col = next((c for c in ("title", "name") if c in fields), None)
        if rank_col is None or name_col is None:
            raise GraphInputError(f"{path}: need rank and name columns, got {fields}")
        entries = {}
        for lineno, row in enumerate(reader, 2):
            try:
                entries[row[name_col]] = int(row[rank_col])
            except (TypeError, ValueError):
                raise GraphInputError(f"{path}:{lineno}: bad rank {row[rank_col]!r}") from None
    try:
        return EditionRankTable(edition_tag or path.stem, entries)
    except ValueError as exc:
        raise GraphInputError(f"{path}: {exc}") from None


def write_theta(path, scores: Sequence[ThetaScore], editions: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["theta_rank", "name", "theta", *editions])
        for k, s in enumerate(scores, 1):
            w.writerow([k, s.name, s.theta, *(s.ranks.get(e, "") for e in editions)])


def write_matrix(path, matrix: np.ndarray, row_names, col_names) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["", *col_names])
        for name, row in zip(row_names, matrix):
            w.writerow([name, *map(fmt, row)])


def read_matrix(path) -> tuple[np.ndarray, list[str], list[str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise GraphInputError(f"{path}: empty matrix file")
    cols = rows[0][1:]
    names = [r[0] for r in rows[1:]]
    try:
        data = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise GraphInputError(f"{path}: {exc}") from None
    return data.reshape(len(names), len(cols)), names, cols


def write_bundle(out_dir, rset: ReducedMatrixSet, extra_meta: dict | None = None) -> Path:
    """One CSV per component plus ``meta.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in rset.COMPONENTS:
        write_matrix(out / f"{name}.csv", getattr(rset, name), rset.names, rset.names)
    meta = {
        "alpha": rset.alpha,
        "lambda_c": rset.lambda_c,
        "edition_tag": rset.edition_tag,
        "tolerances": rset.tolerances,
        "subset": list(rset.names),
        "subset_indices": [int(i) for i in rset.subset.indices],
        "flags": list(rset.flags),
        "orientation": "column = source, row = destination",
    }
    meta.update(extra_meta or {})
    write_json(out / "meta.json", meta)
    return out


def read_bundle(in_dir) -> ReducedMatrixSet:
    src = Path(in_dir)
    meta_path = src / "meta.json"
    if not meta_path.is_file():
        raise GraphInputError(f"{src}: not a matrix bundle (meta.json missing)")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    names = tuple(meta["subset"])
    mats = {}
    for name in ReducedMatrixSet.COMPONENTS:
        m, rows, cols = read_matrix(src / f"{name}.csv")
        if tuple(rows) != names or tuple(cols) != names:
            raise GraphInputError(f"{src / (name + '.csv')}: names disagree with meta.json")
        mats[name] = m
    indices = tuple(meta.get("subset_indices") or range(len(names)))
    return ReducedMatrixSet(NodeSubset(indices, names), lambda_c=meta.get("lambda_c"),
                            alpha=meta["alpha"], edition_tag=meta.get("edition_tag", ""),
                            tolerances=meta.get("tolerances", {}),
                            flags=list(meta.get("flags", [])), **mats)


def write_sensitivity(path, names: Iterable[str], D) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["name", "D"])
        for name, d in zip(names, D):
            w.writerow([name, fmt(d)])


def friendship_to_networkx(fg: FriendshipGraph) -> nx.DiGraph:
    g = nx.DiGraph()
    for name in fg.nodes:
        g.add_node(name, label=name)
    for e in fg.edges:
        g.add_edge(e.source, e.target, weight=e.weight, dominance=e.dominance,
                   generation=e.generation, color=e.color)
    return g


def write_gexf(path, fg: FriendshipGraph) -> None:
    nx.write_gexf(friendship_to_networkx(fg), path, version="1.2draft")


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_dot(path, fg: FriendshipGraph) -> None:
    lines = [f"digraph friends {{", f"  // component={fg.component} k={fg.k}"]
    for name in fg.nodes:
        lines.append(f"  {_quote(name)};")
    for e in fg.edges:
        attrs = (f'weight="{fmt(e.weight)}", dominance="{e.dominance}", '
                 f'generation="{e.generation}", color="{e.color}"')
        lines.append(f"  {_quote(e.source)} -> {_quote(e.target)} [{attrs}];")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_friend_edges(path, fg: FriendshipGraph) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["source", "target", "weight", "dominance", "generation"])
        for e in fg.edges:
            w.writerow([e.source, e.target, fmt(e.weight), e.dominance, e.generation])
