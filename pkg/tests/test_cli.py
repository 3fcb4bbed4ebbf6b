import csv
import io
import json

import pytest

from gofor import example_graph
from gofor.cli import BENCH_HEADER, BENCH_VERSION, main
from gofor.graph_model import dump_repetita, load_topology_file


@pytest.fixture(scope="module")
def tradeoff_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("topo") / "tradeoff.json"
    path.write_text(json.dumps(example_graph("msd_tradeoff").to_json()))
    return str(path)


@pytest.fixture(scope="module")
def metadag_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("topo") / "metadag.txt"
    path.write_text(dump_repetita(example_graph("dclc_metadag")))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_prints_lists(capsys, tradeoff_file):
    code, out, err = run(capsys, "solve", tradeoff_file, "--usecase", "ld", "--source", "S", "--dest", "D", "--msd", "2")
    assert code == 0
    assert out == "D\tN_1(S->6),N_1(6->D) [2, 5, 5]\n"
    assert "gamma=1" in err


def test_solve_json_and_cache(capsys, tmp_path, tradeoff_file):
    out_file, cache = tmp_path / "f.json", tmp_path / "segs.bin"
    args = ["solve", tradeoff_file, "--usecase", "dclc", "--source", "S", "--msd", "3", "--delay-bound", "6"]
    assert run(capsys, *args, "--cache", str(cache), "--out", str(out_file))[0] == 0
    assert cache.exists()
    doc = json.loads(out_file.read_text())
    d = str(doc["node_names"].index("D"))
    assert doc["fronts"][d][0]["distance"][0] <= 3
    # second run reads the cache and agrees
    assert run(capsys, *args, "--cache", str(cache), "--out", str(out_file))[0] == 0
    assert json.loads(out_file.read_text())["fronts"] == doc["fronts"]


def test_verify(capsys, tradeoff_file):
    code, out, err = run(capsys, "verify", tradeoff_file, "--usecase", "ld", "--source", "S", "--msd", "2",
                         "--strategy", "lex")
    assert code == 0 and "verify: ok" in err
    code, _, err = run(capsys, "solve", tradeoff_file, "--usecase", "ld", "--source", "S", "--verify")
    assert code == 2 and "--msd" in err


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["solve", "/nonexistent.txt", "--source", "0"], "nonexistent"),
        (["solve", "TOPO", "--usecase", "frr", "--source", "S", "--msd", "2"], "--fail-edge"),
        (["solve", "TOPO", "--usecase", "frr", "--source", "S", "--msd", "2", "--fail-edge", "42"], "unknown edge"),
        (["solve", "TOPO", "--source", "Z"], "Z"),
        (["metadag", "TOPO", "--source", "S"], "--dest"),
    ],
)
def test_usage_errors(capsys, tradeoff_file, argv, needle):
    argv = [tradeoff_file if a == "TOPO" else a for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 2 and needle in err


def test_metadag_dot(capsys, tmp_path, metadag_file):
    base = ["metadag", metadag_file, "--usecase", "dclc", "--source", "S", "--dest", "D", "--msd", "4",
            "--delay-bound", "7", "--diversity", "all", "--distance", "12,6"]
    code, out, err = run(capsys, *base, "--limit", "2", "--sample", "3")
    assert code == 0
    assert 'label="4@(1,7,4)"' in out and 'label="4@(3,8,3)"' in out
    assert err.count("[3, 12, 6]") + err.count("[4, 12, 6]") == 3
    dot = tmp_path / "m.dot"
    assert run(capsys, *base, "--out", str(dot))[0] == 0
    assert dot.read_text() == out
    code, out, err = run(capsys, *base[:-2], "--distance", "1,1")
    assert code == 0 and "warning" in err


def test_gen_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert run(capsys, "gen", "lattice", "--width", "4", "--height", "3", "--seed", "5", "--out", str(p))[0] == 0
    assert a.read_text() == b.read_text()
    g = load_topology_file(str(a))
    assert g.n == 12
    code, out, _ = run(capsys, "gen", "sparse", "--nodes", "20", "--degree", "3", "--format", "json", "--seed", "1")
    assert code == 0 and json.loads(out)["nodes"] == 20
    code, out, _ = run(capsys, "gen", "random", "--nodes", "5", "--edge-prob", "0.5", "--weights", "2-2")
    assert code == 0


def test_bench_csv(capsys, metadag_file):
    argv = ["bench", "--lattice-sizes", "4", "--topologies", metadag_file, "--seeds", "2", "--engine", "both"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == BENCH_VERSION
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert list(rows[0]) == BENCH_HEADER
    assert {r["engine"] for r in rows} == {"gofor-cons", "gofor-lex", "samcra-nosr", "srgraph"}
    assert {r["topology"] for r in rows} == {"lattice4x4", "metadag.txt"}
    assert all(r["runs"] == "2" for r in rows)
    again = list(csv.DictReader(io.StringIO("\n".join(run(capsys, *argv)[1].splitlines()[1:]))))
    assert [(r["gamma_obs"], r["r_obs"]) for r in rows] == [(r["gamma_obs"], r["r_obs"]) for r in again]
