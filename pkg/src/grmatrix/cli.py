"""Command-line pipeline: ingest -> pagerank -> reduce -> analyze -> export.

Exit codes: 0 success, 1 input error, 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (average_reduced, diagonal_sensitivity_matrix, friendship_graph,
                       leader_closure_graph, local_subset_ranking, pagerank_of_reduced,
                       sensitivity, theta_score)
from .export import (read_bundle, read_rank_table, sha256, write_bundle, write_dot,
                     write_friend_edges, write_gexf, write_json, write_local_ranks,
                     write_matrix, write_ranks, write_sensitivity, write_theta)
from .gmatrix import ConvergenceError, StochasticOperator, pagerank, rank_nodes
from .graph import GraphInputError, load_edge_list, load_labels, read_subset_file, resolve_subset
from .reduced import DENSE_LIMIT, ReductionConfig, dense_oracle_reduce, reduce, restricted_pagerank

log = logging.getLogger("grmatrix")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    alpha: float = 0.85
    pagerank_tol: float = 1e-12
    eigen_tol: float = 1e-12
    series_tol: float = 1e-12
    max_iter: int = 10_000
    delta: float = 0.01
    top_k: int = 4
    deterministic: bool = False
    threads: int = 1
    inputs: dict = field(default_factory=dict)
    out: str = ""

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise GraphInputError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if min(self.pagerank_tol, self.eigen_tol, self.series_tol) <= 0:
            raise GraphInputError("tolerances must be positive")
        if self.max_iter < 1 or self.threads < 1 or self.top_k < 1:
            raise GraphInputError("--max-iter, --threads and --top-k must be >= 1")

    def reduction(self) -> ReductionConfig:
        return ReductionConfig(eigen_tol=self.eigen_tol, eigen_max_iter=self.max_iter,
                               series_tol=self.series_tol, series_max_iter=self.max_iter,
                               threads=self.threads)

    def meta(self) -> dict:
        checksums = {}
        for key, value in self.inputs.items():
            paths = value if isinstance(value, list) else [value]
            for p in paths:
                if p and Path(p).is_file():
                    checksums[str(p)] = sha256(p)
                elif p and Path(p, "meta.json").is_file():
                    checksums[str(Path(p, "meta.json"))] = sha256(Path(p, "meta.json"))
        return {"config": asdict(self), "input_checksums": checksums, "version": __version__}


def _threads(value):
    if value is not None:
        return value
    return int(os.environ.get("GRM_THREADS", "1"))


def _config(args, **inputs) -> RunConfig:
    return RunConfig(
        command=args.command, alpha=args.alpha, pagerank_tol=args.tol,
        eigen_tol=args.eigen_tol, series_tol=args.series_tol, max_iter=args.max_iter,
        delta=args.delta, top_k=args.top_k, deterministic=args.deterministic,
        threads=1 if args.deterministic else _threads(args.threads),
        inputs={k: v for k, v in inputs.items() if v}, out=str(args.out),
    )


def _load_graph(args):
    graph = load_edge_list(args.edges, keep_self_loops=args.keep_self_loops)
    if args.labels:
        graph = load_labels(args.labels, graph)
    return graph


def _load_subset(path, graph):
    return resolve_subset(read_subset_file(path), graph)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_pagerank(args) -> int:
    cfg = _config(args, edges=args.edges, labels=args.labels, subset=args.subset)
    graph = _load_graph(args)
    pr = pagerank(StochasticOperator(graph, cfg.alpha), cfg.pagerank_tol, cfg.max_iter)
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        out.parent.mkdir(parents=True, exist_ok=True)
        rank_path, out_dir = out, out.parent
    else:
        out_dir = _out_dir(args)
        rank_path = out_dir / "ranks.csv"
    write_ranks(rank_path, rank_nodes(pr, graph))
    meta = cfg.meta()
    meta.update(residual=pr.residual, iterations=pr.iterations, n_nodes=graph.n_nodes,
                n_edges=graph.n_edges)
    if args.subset:
        subset = _load_subset(args.subset, graph)
        table = local_subset_ranking(pr, subset, args.edition or Path(args.edges).stem)
        local_path = rank_path.with_name(rank_path.stem + "_local.csv")
        write_local_ranks(local_path, table, graph, subset, pr)
    write_json(rank_path.with_name(rank_path.stem + "_meta.json"), meta)
    log.info("PageRank converged in %d iterations (residual %.2e)", pr.iterations, pr.residual)
    return EXIT_OK


def _max_dev(a, b) -> float:
    return max(float(np.abs(getattr(a, c) - getattr(b, c)).max()) for c in a.COMPONENTS)


def cmd_reduce(args) -> int:
    if not args.subset:
        raise GraphInputError("reduce needs --subset")
    cfg = _config(args, edges=args.edges, labels=args.labels, subset=args.subset)
    graph = _load_graph(args)
    subset = _load_subset(args.subset, graph)
    op = StochasticOperator(graph, cfg.alpha)
    rset = reduce(graph, subset, cfg.alpha, cfg.reduction(),
                  edition_tag=args.edition or Path(args.edges).stem, op=op)
    extra = cfg.meta()
    extra["dataset_checksum"] = sha256(args.edges)
    extra["pagerank_of_reduced"] = "power iteration on GR, no extra damping"
    if args.verify:
        if graph.n_nodes > DENSE_LIMIT:
            raise GraphInputError(f"--verify needs N <= {DENSE_LIMIT}, graph has {graph.n_nodes}")
        dev = _max_dev(rset, dense_oracle_reduce(graph, subset, cfg.alpha))
        extra["verify_max_deviation"] = dev
        print(f"max elementwise deviation from dense oracle: {dev:.3e}")
    write_bundle(_out_dir(args), rset, extra)
    for flag in rset.flags:
        log.info("note: %s", flag)
    return EXIT_OK


def cmd_verify(args) -> int:
    """Dense-oracle cross checks on a small graph."""
    cfg = _config(args, edges=args.edges, labels=args.labels, subset=args.subset)
    graph = _load_graph(args)
    if graph.n_nodes > DENSE_LIMIT:
        raise GraphInputError(f"verify needs N <= {DENSE_LIMIT}, graph has {graph.n_nodes}")
    op = StochasticOperator(graph, cfg.alpha)
    G = op.dense()
    pr = pagerank(op, cfg.pagerank_tol, cfg.max_iter)
    eye = np.eye(graph.n_nodes)
    exact = np.linalg.solve(eye - cfg.alpha * op.links.toarray()
                            - cfg.alpha * np.outer(np.ones(graph.n_nodes), op.dangling) / graph.n_nodes,
                            np.full(graph.n_nodes, (1 - cfg.alpha) / graph.n_nodes))
    report = {
        "column_sum_deviation": float(np.abs(G.sum(axis=0) - 1).max()),
        "pagerank_l1_vs_linear_solve": float(np.abs(pr.probabilities - exact / exact.sum()).sum()),
    }
    if args.subset:
        subset = _load_subset(args.subset, graph)
        rset = reduce(graph, subset, cfg.alpha, cfg.reduction(), op=op)
        report["reduce_max_deviation"] = _max_dev(rset, dense_oracle_reduce(graph, subset, cfg.alpha))
        report["projection_l1"] = float(np.abs(
            pagerank_of_reduced(rset).probabilities
            - restricted_pagerank(pr.probabilities, subset)).sum())
    for key, value in report.items():
        print(f"{key}: {value:.3e}")
    if args.out:
        write_json(_out_dir(args) / "verify.json", {**cfg.meta(), "report": report})
    return EXIT_OK


def cmd_theta(args) -> int:
    cfg = _config(args, tables=[str(t) for t in args.tables])
    tags = args.tags or [None] * len(args.tables)
    if len(tags) != len(args.tables):
        raise GraphInputError("--tags must match the number of tables")
    tables = [read_rank_table(p, t) for p, t in zip(args.tables, tags)]
    scores = theta_score(tables, args.cutoff)
    out = _out_dir(args)
    write_theta(out / "theta.csv", scores, [t.edition_tag for t in tables])
    write_json(out / "meta.json", {**cfg.meta(), "cutoff": args.cutoff})
    return EXIT_OK


def _read_names(path) -> list[str]:
    return read_subset_file(path)


def cmd_friends(args) -> int:
    cfg = _config(args, bundle=args.bundle, leaders=args.leaders_file)
    rset = read_bundle(args.bundle)
    leaders = list(args.leader or [])
    if args.leaders_file:
        leaders += _read_names(args.leaders_file)
    if leaders:
        fg = leader_closure_graph(rset, leaders, cfg.top_k, args.component or "Gqrnd")
    else:
        fg = friendship_graph(rset, cfg.top_k, args.component or "Grr+Gqrnd")
    out = _out_dir(args)
    write_gexf(out / "friends.gexf", fg)
    write_dot(out / "friends.dot", fg)
    write_friend_edges(out / "friends.csv", fg)
    write_json(out / "meta.json", {**cfg.meta(), "component": fg.component,
                                   "leaders": leaders, "n_edges": len(fg.edges)})
    return EXIT_OK


def cmd_average(args) -> int:
    cfg = _config(args, bundles=[str(b) for b in args.bundles])
    try:
        avg = average_reduced([read_bundle(b) for b in args.bundles])
    except ValueError as exc:
        raise GraphInputError(str(exc)) from None
    pr = pagerank_of_reduced(avg)
    out = _out_dir(args)
    meta = cfg.meta()
    meta["pagerank_of_reduced"] = "power iteration on GR, no extra damping"
    write_bundle(out, avg, meta)
    with open(out / "K_av.csv", "w", encoding="utf-8") as fh:
        fh.write("K_av,name,probability\n")
        for k, i in enumerate(pr.k_index, 1):
            fh.write(f"{k},{avg.names[i]},{pr.probabilities[i]:.17g}\n")
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    cfg = _config(args, bundle=args.bundle, sources=args.sources, targets=args.targets)
    rset = read_bundle(args.bundle)
    out = _out_dir(args)
    if not args.link and not (args.sources and args.targets):
        raise GraphInputError("sensitivity needs --link P C or --sources/--targets")
    base = pagerank_of_reduced(rset).probabilities
    written = []
    for k, (p, c) in enumerate(args.link or []):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = sensitivity(rset, (p, c), cfg.delta, base)
        for w in caught:
            log.warning("%s", w.message)
        path = out / f"sensitivity_{k:02d}.csv"
        write_sensitivity(path, rset.names, res.D)
        written.append({"file": path.name, "source": p, "target": c})
    if args.sources and args.targets:
        ps, cs = _read_names(args.sources), _read_names(args.targets)
        grid = diagonal_sensitivity_matrix(rset, ps, cs, cfg.delta)
        write_matrix(out / "diagonal_sensitivity.csv", grid, cs, ps)
        written.append({"file": "diagonal_sensitivity.csv", "rows": "targets",
                        "columns": "sources"})
    write_json(out / "meta.json", {**cfg.meta(), "outputs": written,
                                   "estimator": "central difference over +/-delta",
                                   "pagerank_of_reduced": "power iteration on GR, no extra damping"})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=0.85, help="damping factor")
    common.add_argument("--tol", type=float, default=1e-12, help="PageRank L1 tolerance")
    common.add_argument("--eigen-tol", type=float, default=1e-12)
    common.add_argument("--series-tol", type=float, default=1e-12)
    common.add_argument("--max-iter", type=int, default=10_000)
    common.add_argument("--delta", type=float, default=0.01, help="relative link weight change")
    common.add_argument("--top-k", type=int, default=4)
    common.add_argument("--deterministic", action="store_true",
                        help="fixed reduction order (forces one thread)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $GRM_THREADS or 1)")
    common.add_argument("--out", required=True, help="output directory (or .csv for pagerank)")
    common.add_argument("-v", "--verbose", action="store_true")

    graph_in = argparse.ArgumentParser(add_help=False)
    graph_in.add_argument("--edges", required=True, help="edge-list file")
    graph_in.add_argument("--labels", help="label file: <id>\\t<title>")
    graph_in.add_argument("--subset", help="subset file: one title or @<id> per line")
    graph_in.add_argument("--keep-self-loops", action="store_true")
    graph_in.add_argument("--edition", help="edition tag recorded in outputs")

    parser = argparse.ArgumentParser(prog="grmatrix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pagerank", parents=[common, graph_in], help="global PageRank ranking")
    p.set_defaults(func=cmd_pagerank)

    p = sub.add_parser("reduce", parents=[common, graph_in], help="reduced Google matrix bundle")
    p.add_argument("--verify", action="store_true", help="compare with the dense oracle")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", parents=[common, graph_in], help="dense-oracle checks")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("theta", parents=[common], help="multi-edition theta score")
    p.add_argument("tables", nargs="+", help="local rank CSV files, one per edition")
    p.add_argument("--tags", nargs="*", help="edition tags (default: file stems)")
    p.add_argument("--cutoff", type=int, default=100)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("friends", parents=[common], help="friendship network export")
    p.add_argument("--bundle", required=True)
    p.add_argument("--component", help="GR, Grr, Gqrnd, Grr+Gqrnd ...")
    p.add_argument("--leader", action="append", help="leader name (repeatable)")
    p.add_argument("--leaders-file")
    p.set_defaults(func=cmd_friends)

    p = sub.add_parser("average", parents=[common], help="edition-averaged bundle")
    p.add_argument("bundles", nargs="+")
    p.set_defaults(func=cmd_average)

    p = sub.add_parser("sensitivity", parents=[common], help="link sensitivity of PageRank")
    p.add_argument("--bundle", required=True)
    p.add_argument("--link", nargs=2, action="append", metavar=("SOURCE", "TARGET"))
    p.add_argument("--sources", help="names file for the column side of the diagonal grid")
    p.add_argument("--targets", help="names file for the row side of the diagonal grid")
    p.set_defaults(func=cmd_sensitivity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GraphInputError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
