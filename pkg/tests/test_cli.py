import json

import pytest

from twodist import graph as gmod
from twodist.cli import EXIT_DEGENERATE, EXIT_INFEASIBLE, EXIT_MALFORMED, EXIT_OK, run
from twodist.synth import build_D


def last_feasible(table: str) -> float:
    samples = table.split("\n\n")[0]
    rows = [line.split("\t") for line in samples.splitlines()[1:]]
    return max(float(d) for d, status, _ in rows if status == "Feasible")


@pytest.fixture
def tri(tmp_path):
    path = tmp_path / "triangle.json"
    gmod.save(gmod.triangle(), path)
    return str(path)


@pytest.fixture
def ratio(tmp_path):
    path = tmp_path / "d32.json"
    gmod.save(build_D(3, 2).graph, path)
    return str(path)


def test_check_exit_codes(tri):
    assert run(["check", tri, "--d", "1.5", "--restarts", "8"]) == EXIT_OK
    assert run(["check", tri, "--d", "2.5", "--restarts", "8"]) == EXIT_INFEASIBLE


def test_check_degenerate(tmp_path):
    # two red classes tied to one vector with a blue edge between their heads
    b = gmod.Builder()
    v = b.vertices(3)
    b.red_edge(v[0], v[1])
    b.red_edge(v[0], v[2])
    c = b.new_class()
    b.green(v[0], v[1], c)
    b.green(v[0], v[2], c)
    path = tmp_path / "twin.json"
    gmod.save(b.build(), path)
    assert run(["check", str(path), "--d", "1.0", "--restarts", "4"]) == EXIT_DEGENERATE


@pytest.mark.parametrize("argv", [
    ["check", "missing.json", "--d", "1"],
    ["synth", "--set", "[1,2", "--lambda", "1/2", "--upsilon", "2", "--out", "x.json"],
    ["synth", "--poly", "1,0,1", "--out", "x.json"],
    ["decompose", "--set", "[1,2]", "--lambda", "-1", "--upsilon", "2"],
])
def test_malformed(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == EXIT_MALFORMED


def test_range_on_ratio_fixture(ratio, tmp_path):
    out = tmp_path / "prof.tsv"
    assert run(["range", ratio, "--lo", "0.5", "--hi", "2.5", "--steps", "21", "--restarts", "16",
                "--out", str(out)]) == EXIT_OK
    assert abs(last_feasible(out.read_text()) - 1.5) <= 0.01


def test_decompose_document(capsys):
    assert run(["decompose", "--set", "[1,alg(-2,0,1;1,2)]", "--lambda", "1/2", "--upsilon", "2"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["terms"]) == 3 and doc["terms"][-1]["zeta"] == 1


def test_synth_poly_then_check(tmp_path, capsys):
    g = tmp_path / "g.json"
    assert run(["synth", "--poly", "2,0,-1", "--out", str(g)]) == EXIT_OK
    assert "vertices\t79" in capsys.readouterr().out
    assert run(["check", str(g), "--d", "1.2", "--restarts", "32"]) == EXIT_OK
    assert "exact_member\tyes" in capsys.readouterr().out
    assert run(["check", str(g), "--d", "1.6", "--restarts", "16"]) == EXIT_INFEASIBLE
    assert "exact_member\tno" in capsys.readouterr().out


def test_synth_sidecar_and_materialize(tmp_path, capsys):
    g = tmp_path / "g.json"
    assert run(["synth", "--set", "[1,1]", "--lambda", "1/2", "--upsilon", "2", "--out", str(g)]) == EXIT_OK
    side = json.loads((tmp_path / "g.json.prov.json").read_text())
    assert side["source_set"] == "[1,1]" and len(side["terms"]) == 2
    small = tmp_path / "s.json"
    gmod.save(gmod.Builder().build(), small)
    assert run(["materialize", str(small), "--w", "3", "--out", str(tmp_path / "m.json")]) == EXIT_OK


def test_round_trip_profile(tmp_path):
    g = tmp_path / "g.json"
    assert run(["synth", "--poly", "2,0,-1", "--out", str(g)]) == EXIT_OK
    copy = tmp_path / "copy.json"
    gmod.save(gmod.load(g), copy)
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    args = ["--lo", "1.0", "--hi", "1.8", "--steps", "5", "--restarts", "32", "--refine", "2"]
    assert run(["range", str(g), *args, "--out", str(a)]) == EXIT_OK
    assert run(["range", str(copy), *args, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert abs(last_feasible(a.read_text()) - 2**0.5) < 0.02


def test_render_rejects_foreign_representation(tri, tmp_path, ratio):
    rep = tmp_path / "rep.json"
    assert run(["check", tri, "--d", "1.2", "--restarts", "4", "--rep-out", str(rep)]) == EXIT_OK
    assert run(["render", str(rep), ratio, "--out", str(tmp_path / "x.svg")]) == EXIT_MALFORMED
    assert run(["render", str(rep), tri, "--out", str(tmp_path / "t.svg")]) == EXIT_OK
    assert (tmp_path / "t.svg").stat().st_size > 0


def test_seed_changes_nothing_for_feasible_verdict(tri):
    assert run(["check", tri, "--d", "1.0", "--restarts", "4", "--seed", "7"]) == EXIT_OK
