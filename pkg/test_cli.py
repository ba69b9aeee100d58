"""Tests for the command-line interface."""

import io

import pytest

from maapnet.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(["--no-log-file", "--log-level", "WARNING", *argv], out=out)
    return code, out.getvalue().splitlines()


@pytest.fixture
def built(tmp_path):
    def build(*argv):
        code, lines = run("build", *argv, "--out-dir", str(tmp_path))
        assert code == 0
        return lines
    return build


def test_build_mst(built, tmp_path):
    lines = built("mst", "--n", "4")
    assert (tmp_path / "mst_4.maap.json").exists()
    assert (tmp_path / "mst_4.relu.json").exists()
    assert "ledger d=5 w=12 s=52" in lines
    assert any(line.startswith("net depth=") for line in lines)


def test_build_is_deterministic(built, tmp_path):
    built("mst", "--n", "4")
    first = (tmp_path / "mst_4.relu.json").read_bytes()
    built("mst", "--n", "4")
    assert (tmp_path / "mst_4.relu.json").read_bytes() == first


def test_build_rejects_one_vertex(tmp_path):
    code, _ = run("build", "mst", "--n", "1", "--out-dir", str(tmp_path))
    assert code == 2


def test_eval_min2(built, tmp_path):
    built("min2")
    instances = tmp_path / "pairs.txt"
    instances.write_text("3 5\n5, 3\n# comment\n-1 7/2\n")
    code, lines = run("eval", str(tmp_path / "min2.relu.json"), str(instances))
    assert code == 0
    assert lines == ["3", "3", "-1"]
    code, lines = run("eval", str(tmp_path / "min2.maap.json"), str(instances), "--mode", "float")
    assert code == 0
    assert lines == ["3.0", "3.0", "-1.0"]


def test_eval_mst_network(built, tmp_path):
    built("mst", "--n", "3")
    instance = tmp_path / "k3.txt"
    instance.write_text("1 2 3\n")
    code, lines = run("eval", str(tmp_path / "mst_3.relu.json"), str(instance))
    assert (code, lines) == (0, ["3"])


def test_eval_mst_graph_file(built, tmp_path):
    built("mst", "--n", "3", "--no-net")
    graph = tmp_path / "path.txt"
    graph.write_text("3 2 undirected\n1 2 1\n2 3 2\n")
    code, lines = run("eval", str(tmp_path / "mst_3.maap.json"), str(graph))
    assert (code, lines) == (0, ["3"])


def test_eval_wrong_dimension(built, tmp_path):
    built("mst", "--n", "3")
    instance = tmp_path / "short.txt"
    instance.write_text("1 2\n")
    code, _ = run("eval", str(tmp_path / "mst_3.relu.json"), str(instance))
    assert code == 2


def test_build_and_eval_maxflow(built, tmp_path):
    graph = tmp_path / "g.txt"
    graph.write_text("2 1 directed source=1 sink=2\n1 2 5\n")
    lines = built("maxflow", "--graph", str(graph))
    assert (tmp_path / "maxflow_2.relu.json").exists()
    code, lines = run("eval", str(tmp_path / "maxflow_2.maap.json"), str(graph))
    assert (code, lines) == (0, ["5", "flow_value=5"])
    code, lines = run("eval", str(tmp_path / "maxflow_2.relu.json"), str(graph))
    assert (code, lines) == (0, ["5", "flow_value=5"])


def test_verify(tmp_path):
    code, lines = run("verify", "mst", "--n", "2..4", "--trials", "3", "--seed", "7")
    assert code == 0
    assert lines == [f"size={n} trials=3 pass=3 fail=0" for n in (2, 3, 4)]


def test_verify_zero_trials():
    code, lines = run("verify", "maxflow", "--n", "3", "--trials", "0")
    assert (code, lines) == (0, ["size=3 trials=0 pass=0 fail=0"])


def test_verify_bad_range():
    with pytest.raises(SystemExit) as err:
        run("verify", "mst", "--n", "a..b")
    assert err.value.code == 2


@pytest.mark.parametrize("sizes", ["1..3", "0", "1"])
def test_verify_sizes_below_two(sizes):
    assert run("verify", "mst", "--n", sizes, "--trials", "1") == (2, [])
    assert run("verify", "maxflow", "--n", sizes, "--trials", "1") == (2, [])


def test_verify_open_range():
    with pytest.raises(SystemExit) as err:
        run("verify", "maxflow", "--n", "1..")
    assert err.value.code == 2


def test_stats_network(built, tmp_path):
    built("min2")
    code, lines = run("stats", str(tmp_path / "min2.relu.json"))
    assert code == 0
    assert "net depth=2 width=1 size=1" in lines
    assert "decompiled ledger d=1 w=2 s=4" in lines


def test_stats_program(built, tmp_path):
    built("mst", "--n", "5", "--no-net")
    code, lines = run("stats", str(tmp_path / "mst_5.maap.json"))
    assert code == 0
    assert lines[0] == "ledger d=8 w=24 s=116"
    assert lines[-1].endswith(": ok")


def test_stats_empty_file(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    code, _ = run("stats", str(empty))
    assert code == 2
