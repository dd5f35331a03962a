import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grmatrix.graph import (DirectedGraph, GraphInputError, NodeSubset, load_edge_list,
                            load_labels, read_subset_file, resolve_subset)


def edge_set(g):
    src, dst = g.edges()
    return {(int(g.external_ids[s]), int(g.external_ids[d])) for s, d in zip(src, dst)}


def test_two_cycle(write):
    g = load_edge_list(write("g.txt", "0 1\n1 0\n"))
    assert g.n_nodes == 2
    assert edge_set(g) == {(0, 1), (1, 0)}


def test_self_loop_dropped_and_ids_remapped(write):
    g = load_edge_list(write("g.txt", "5 5\n5 7\n"))
    assert g.n_nodes == 2
    assert g.n_edges == 1
    assert list(g.external_ids) == [5, 7]
    assert list(g.out_links(0)) == [1]


def test_self_loop_kept_on_request(write):
    g = load_edge_list(write("g.txt", "5 5\n5 7\n"), keep_self_loops=True)
    assert edge_set(g) == {(5, 5), (5, 7)}


def test_duplicates_collapse(write):
    g = load_edge_list(write("g.txt", "0 1\n" * 1_000_000))
    assert (g.n_nodes, g.n_edges) == (2, 1)


def test_comments_and_header(write):
    g = load_edge_list(write("g.txt", "# nodes=5\n# a comment\n0 1\n\n3 1\n"))
    assert g.n_nodes == 5
    assert list(g.external_ids) == [0, 1, 2, 3, 4]
    assert g.out_degree.tolist() == [1, 0, 0, 1, 0]


@pytest.mark.parametrize("text, fragment", [
    ("0 1\n1 x\n", ":2:"),
    ("0 1\n1 2 3\n", ":2:"),
    ("0 1\n-1 2\n", ":2:"),
    ("0 1\n2\n", ":2:"),
])
def test_malformed_line_reports_line_number(write, text, fragment):
    with pytest.raises(GraphInputError, match=fragment):
        load_edge_list(write("g.txt", text))


def test_id_overflow(write):
    with pytest.raises(GraphInputError, match="overflow"):
        load_edge_list(write("g.txt", "0 1\n99999999999999999999 1\n"))
    with pytest.raises(GraphInputError, match="overflow"):
        load_edge_list(write("h.txt", "# nodes=3\n0 1\n1 3\n"))


def test_empty_file(write):
    with pytest.raises(GraphInputError, match="no edges"):
        load_edge_list(write("g.txt", "# only a comment\n"))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_edge_list(tmp_path / "nope.txt")


def test_target_only_nodes_are_dangling(write):
    g = load_edge_list(write("g.txt", "0 1\n0 2\n"))
    assert g.out_degree.tolist() == [2, 0, 0]


def test_labels(write):
    g = load_edge_list(write("g.txt", "17 3\n3 17\n"))
    g = load_labels(write("l.tsv", "17\tLeonardo da Vinci\n3\tRaphael\n"), g)
    assert g.label(g.internal_id(17)) == "Leonardo da Vinci"


def test_unknown_label_warns(write):
    g = load_edge_list(write("g.txt", "0 1\n"))
    with pytest.warns(UserWarning, match="999"):
        g2 = load_labels(write("l.tsv", "999\tNobody\n"), g)
    assert not g2.labels
    assert g2.same_structure(g)


def test_ambiguous_title_rejected(write):
    g = load_edge_list(write("g.txt", "0 1\n"))
    with pytest.raises(GraphInputError, match="mapped to ids"):
        load_labels(write("l.tsv", "0\tSame\n1\tSame\n"), g)


def test_malformed_label_line(write):
    g = load_edge_list(write("g.txt", "0 1\n"))
    with pytest.raises(GraphInputError, match=":1:"):
        load_labels(write("l.tsv", "zero Title\n"), g)


@pytest.fixture
def labelled(write):
    g = load_edge_list(write("g.txt", "10 11\n11 12\n12 10\n"))
    return load_labels(write("l.tsv", "10\tPablo Picasso\n11\tClaude Monet\n12\tFrance\n"), g)


def test_resolve_in_given_order(labelled):
    sub = resolve_subset(["Pablo Picasso", "Claude Monet"], labelled)
    assert sub.names == ("Pablo Picasso", "Claude Monet")
    assert sub.indices == (0, 1)


def test_resolve_by_id(labelled):
    sub = resolve_subset(["@12", 11], labelled)
    assert sub.names == ("France", "Claude Monet")


def test_resolve_lists_all_misses(labelled):
    with pytest.raises(GraphInputError, match="Nosuch Painter.*Other"):
        resolve_subset(["Nosuch Painter", "France", "Other"], labelled)


def test_resolve_rejects_duplicates(labelled):
    with pytest.raises(GraphInputError, match="duplicate"):
        resolve_subset(["France", "@12"], labelled)


def test_painters_then_countries(write):
    n = 100
    g = load_edge_list(write("g.txt", "".join(f"{i} {(i + 1) % n}\n" for i in range(n))))
    labels = "".join(f"{i}\tpainter {i}\n" for i in range(40))
    labels += "".join(f"{i}\tcountry {i}\n" for i in range(40, 80))
    g = load_labels(write("l.tsv", labels), g)
    names = [f"painter {i}" for i in range(40)] + [f"country {i}" for i in range(40, 80)]
    sub = resolve_subset(names, g)
    assert len(sub) == 80
    assert sub.names[:40] == tuple(names[:40])


def test_subset_file(write):
    p = write("s.txt", "# painters\nPablo Picasso\n\n@12\n")
    assert read_subset_file(p) == ["Pablo Picasso", "@12"]


def test_node_subset_invariants():
    with pytest.raises(ValueError):
        NodeSubset((1, 1), ("a", "b"))
    with pytest.raises(ValueError):
        NodeSubset((), ())


def test_graph_arrays_are_read_only(write):
    g = load_edge_list(write("g.txt", "0 1\n"))
    with pytest.raises(ValueError):
        g.out_indices[0] = 5


edges_strategy = st.lists(st.tuples(st.integers(0, 40), st.integers(0, 40)), min_size=1,
                          max_size=120)


@given(edges_strategy)
@settings(max_examples=60, deadline=None)
def test_transpose_round_trip(edges):
    src, dst = zip(*edges)
    g = DirectedGraph.from_edges(src, dst, n_nodes=41)
    from_in = {(int(s), t) for t in range(g.n_nodes) for s in g.in_links(t)}
    from_out = {(s, int(t)) for s in range(g.n_nodes) for t in g.out_links(s)}
    assert from_in == from_out == {(s, d) for s, d in edges if s != d}
    for node in range(g.n_nodes):
        links = g.out_links(node)
        assert np.all(np.diff(links) > 0)
        assert node not in links


@given(edges_strategy, st.randoms(use_true_random=False))
@settings(max_examples=40, deadline=None)
def test_file_order_independence_and_idempotence(tmp_path_factory, edges, rnd):
    d = tmp_path_factory.mktemp("perm")
    lines = [f"{s * 7 + 3} {t * 7 + 3}\n" for s, t in edges]
    (d / "a.txt").write_text("".join(lines))
    rnd.shuffle(lines)
    (d / "b.txt").write_text("".join(lines))
    if all(s == t for s, t in edges):
        return
    a1, a2, b = (load_edge_list(d / f) for f in ("a.txt", "a.txt", "b.txt"))
    assert a1.same_structure(a2)
    assert a1.same_structure(b)
    assert edge_set(a1) == {(s * 7 + 3, t * 7 + 3) for s, t in edges if s != t}
