import csv
import json

import numpy as np
import pytest

from conftest import random_edges
from grmatrix.cli import main

NAMES = ["Alpha", "Beta", "Gamma", "Delta", "Epsilon", "Zeta"]


@pytest.fixture
def dataset(tmp_path):
    """A 60-node edge list with sparse external ids, labels and a 6-member subset."""
    rng = np.random.default_rng(21)
    edges = random_edges(rng, 60, dangling_fraction=0.2)
    ext = 1000 + 7 * np.arange(60)
    lines = ["# toy network"] + [f"{ext[s]} {ext[d]}" for s, d in edges]
    (tmp_path / "edges.txt").write_text("\n".join(lines) + "\n")
    pick = [3, 9, 14, 22, 35, 51]
    labels = [f"{ext[i]}\t{name}" for i, name in zip(pick, NAMES)]
    (tmp_path / "labels.tsv").write_text("\n".join(labels) + "\n", encoding="utf-8")
    (tmp_path / "subset.txt").write_text("\n".join(NAMES) + "\n", encoding="utf-8")
    return tmp_path


def graph_args(d):
    return ["--edges", str(d / "edges.txt"), "--labels", str(d / "labels.tsv"),
            "--subset", str(d / "subset.txt")]


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_pagerank_outputs(dataset):
    out = dataset / "pr"
    assert main(["pagerank", *graph_args(dataset), "--out", str(out)]) == 0
    rows = read_csv(out / "ranks.csv")
    assert len(rows) == 60
    assert [int(r["K"]) for r in rows] == list(range(1, 61))
    assert sum(float(r["probability"]) for r in rows) == pytest.approx(1.0, abs=1e-12)
    local = read_csv(out / "ranks_local.csv")
    assert sorted(r["title"] for r in local) == sorted(NAMES)
    assert [int(r["local_rank"]) for r in local] == list(range(1, 7))
    ks = [int(r["K"]) for r in local]
    assert ks == sorted(ks)
    meta = json.loads((out / "ranks_meta.json").read_text())
    assert meta["config"]["alpha"] == 0.85
    assert meta["residual"] < 1e-12
    assert len(meta["input_checksums"]) == 3


def test_pagerank_to_csv_path(dataset):
    target = dataset / "x" / "en.csv"
    assert main(["pagerank", "--edges", str(dataset / "edges.txt"), "--out", str(target)]) == 0
    assert target.is_file() and (dataset / "x" / "en_meta.json").is_file()


def test_reduce_and_verify(dataset, capsys):
    out = dataset / "bundle"
    assert main(["reduce", *graph_args(dataset), "--verify", "--out", str(out)]) == 0
    meta = json.loads((out / "meta.json").read_text())
    assert meta["verify_max_deviation"] < 1e-10
    assert meta["subset"] == NAMES
    assert len(meta["dataset_checksum"]) == 64
    for name in ("GR", "Grr", "Gpr", "Gqrd", "Gqrnd"):
        assert (out / f"{name}.csv").is_file()
    assert main(["verify", *graph_args(dataset), "--out", str(dataset / "v")]) == 0
    report = json.loads((dataset / "v" / "verify.json").read_text())["report"]
    assert report["projection_l1"] < 1e-6
    assert report["reduce_max_deviation"] < 1e-8
    assert "column_sum_deviation" in capsys.readouterr().out


def test_reduce_needs_subset(dataset):
    assert main(["reduce", "--edges", str(dataset / "edges.txt"), "--out", str(dataset / "o")]) == 1


def test_deterministic_reproducible(dataset):
    digests = []
    for _ in range(2):
        out = dataset / "det"
        assert main(["reduce", *graph_args(dataset), "--deterministic", "--out", str(out)]) == 0
        digests.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert digests[0] == digests[1]


def test_threads_do_not_change_bundle(dataset):
    a, b = dataset / "a", dataset / "b"
    assert main(["reduce", *graph_args(dataset), "--threads", "1", "--out", str(a)]) == 0
    assert main(["reduce", *graph_args(dataset), "--threads", "3", "--out", str(b)]) == 0
    for name in ("GR", "Grr", "Gpr", "Gqrd", "Gqrnd"):
        assert (a / f"{name}.csv").read_bytes() == (b / f"{name}.csv").read_bytes()


def test_friends_k4(dataset):
    bundle = dataset / "bundle"
    main(["reduce", *graph_args(dataset), "--out", str(bundle)])
    out = dataset / "fr"
    assert main(["friends", "--bundle", str(bundle), "--top-k", "4", "--out", str(out)]) == 0
    assert len(read_csv(out / "friends.csv")) == 4 * len(NAMES)
    assert (out / "friends.gexf").is_file() and (out / "friends.dot").is_file()
    out2 = dataset / "fr2"
    assert main(["friends", "--bundle", str(bundle), "--leader", "Alpha", "--top-k", "2",
                 "--out", str(out2)]) == 0
    rows = read_csv(out2 / "friends.csv")
    assert rows[0]["source"] == "Alpha" and rows[0]["generation"] == "leader"
    assert main(["friends", "--bundle", str(bundle), "--leader", "Nobody",
                 "--out", str(out2)]) == 1


def test_average_and_sensitivity(dataset):
    b1, b2 = dataset / "b1", dataset / "b2"
    main(["reduce", *graph_args(dataset), "--out", str(b1)])
    main(["reduce", *graph_args(dataset), "--alpha", "0.8", "--out", str(b2)])
    assert main(["average", str(b1), str(b1), "--out", str(dataset / "avg")]) == 0
    k_av = read_csv(dataset / "avg" / "K_av.csv")
    assert sorted(r["name"] for r in k_av) == sorted(NAMES)
    assert main(["average", str(b1), str(b2), "--out", str(dataset / "bad")]) == 1

    (dataset / "ps.txt").write_text("Alpha\nBeta\n")
    (dataset / "cs.txt").write_text("Gamma\nDelta\nZeta\n")
    out = dataset / "sens"
    assert main(["sensitivity", "--bundle", str(b1), "--link", "Alpha", "Beta",
                 "--sources", str(dataset / "ps.txt"), "--targets", str(dataset / "cs.txt"),
                 "--out", str(out)]) == 0
    rows = read_csv(out / "sensitivity_00.csv")
    assert [r["name"] for r in rows] == NAMES
    with open(out / "diagonal_sensitivity.csv") as fh:
        grid = list(csv.reader(fh))
    assert grid[0] == ["", "Alpha", "Beta"] and len(grid) == 4
    assert main(["sensitivity", "--bundle", str(b1), "--out", str(out)]) == 1


def test_theta_command(dataset):
    tables = []
    for tag, order in (("en", "abc"), ("fr", "bac")):
        p = dataset / f"{tag}.csv"
        p.write_text("rank,name\n" + "".join(f"{k},{n}\n" for k, n in enumerate(order, 1)))
        tables.append(str(p))
    assert main(["theta", *tables, "--out", str(dataset / "th")]) == 0
    rows = read_csv(dataset / "th" / "theta.csv")
    assert [(r["name"], int(r["theta"])) for r in rows] == [("a", 199), ("b", 199), ("c", 196)]
    assert rows[0]["en"] == "1" and rows[0]["fr"] == "2"


def test_unknown_subset_names_listed(dataset, capsys):
    (dataset / "bad.txt").write_text("Alpha\nNope\nMissing\n")
    code = main(["reduce", "--edges", str(dataset / "edges.txt"), "--labels",
                 str(dataset / "labels.tsv"), "--subset", str(dataset / "bad.txt"),
                 "--out", str(dataset / "o")])
    assert code == 1
    err = capsys.readouterr().err
    assert "Nope" in err and "Missing" in err


def test_missing_file(dataset, capsys):
    code = main(["pagerank", "--edges", str(dataset / "absent.txt"), "--out", str(dataset)])
    assert code == 1
    assert "absent.txt" in capsys.readouterr().err


def test_non_convergence_exit_code(dataset):
    code = main(["pagerank", "--edges", str(dataset / "edges.txt"), "--max-iter", "2",
                 "--out", str(dataset / "o")])
    assert code == 2


def test_bad_alpha(dataset):
    assert main(["pagerank", "--edges", str(dataset / "edges.txt"), "--alpha", "1.5",
                 "--out", str(dataset / "o")]) == 1


def test_threads_from_environment(dataset, monkeypatch):
    monkeypatch.setenv("GRM_THREADS", "2")
    out = dataset / "env"
    assert main(["reduce", *graph_args(dataset), "--out", str(out)]) == 0
    assert json.loads((out / "meta.json").read_text())["config"]["threads"] == 2
    assert main(["reduce", *graph_args(dataset), "--deterministic", "--out", str(out)]) == 0
    assert json.loads((out / "meta.json").read_text())["config"]["threads"] == 1
