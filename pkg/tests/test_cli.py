from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from stoqaqc.cli import load_schema, main

BELL = "work 1 1\nCNOT 1 0\n"


@pytest.fixture
def bell(tmp_path):
    p = tmp_path / "bell.qc"
    p.write_text(BELL)
    return str(p)


# (schema name, argv builder) for every JSON-emitting subcommand
def _commands(circ):
    return [
        ("build", ["build", "--circuit", circ, "--clock", "unary", "--pad"]),
        ("check-stoquastic", ["check-stoquastic", "--circuit", circ, "--clock", "domain-wall"]),
        ("gap", ["gap", "--circuit", circ, "--grid", "11"]),
        ("evolve", ["evolve", "--circuit", circ, "--tf", "5", "--trace", "3"]),
        ("sample", ["sample", "--circuit", circ, "--bases", "ZZ", "--shots", "50", "--pad"]),
        ("adaptive-sample", ["adaptive-sample", "--circuit", circ, "--bases", "XX", "--policy", "feedforward", "--shots", "20"]),
        ("factor", ["factor", "--N", "15", "--R", "30"]),
        ("verify", ["verify", "--circuit", circ]),
        ("verify", ["verify", "--circuit", circ, "--shots", "5000"]),
        ("unionjack", ["unionjack", "--rows", "1", "--cols", "1", "--hamiltonian"]),
        ("css-experiment", ["css-experiment", "--p", "0.01", "--shots", "2000"]),
        ("corpus", ["corpus"]),
    ]


def _run(tmp_path, argv, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["--seed", "7", "--out", str(out)])
    return code, out


@pytest.mark.parametrize("idx", range(12))
def test_outputs_validate_and_are_deterministic(tmp_path, bell, idx):
    schema_name, argv = _commands(bell)[idx]
    code, out = _run(tmp_path, argv, "a.json")
    assert code == 0
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, load_schema(schema_name))
    assert doc["schema_version"] == 1 and doc["seed"] == 7
    meta = json.loads((tmp_path / "a.json.meta.json").read_text())
    jsonschema.validate(meta, load_schema("meta"))
    assert meta["argv"][0] == argv[0]
    _, again = _run(tmp_path, argv, "b.json")
    assert out.read_bytes() == again.read_bytes()


def test_gap_csv_with_summary(tmp_path, bell, capsys):
    code = main(["gap", "--circuit", bell, "--grid", "101", "--out", str(tmp_path / "gap.csv")])
    assert code == 0
    lines = (tmp_path / "gap.csv").read_text().splitlines()
    assert lines[0] == "s,E0,E1,gap" and len(lines) > 101
    summary = json.loads(capsys.readouterr().out)
    jsonschema.validate(summary, load_schema("gap-summary"))
    assert summary["min_gap"] > 0


def test_build_writes_hamiltonian(tmp_path, bell):
    code = main(["build", "--circuit", bell, "--clock", "unary", "--pad", "--out", str(tmp_path / "ham.json")])
    doc = json.loads((tmp_path / "ham.json").read_text())
    assert code == 0 and doc["basis"]["kind"] == "unary"
    assert {t["tag"] for t in doc["final"]["terms"]} >= {"H_in", "propagation"}
    assert main(["build", "--circuit", bell, "--format", "coo", "--out", str(tmp_path / "ham.coo")]) == 0
    assert (tmp_path / "ham.coo").read_text().strip()


def test_factor_transcript(tmp_path):
    code, out = _run(tmp_path, ["factor", "--N", "15", "--R", "30"])
    doc = json.loads(out.read_text())
    assert code == 0 and doc["factor"] in (3, 5)
    factor_21 = main(["factor", "--N", "21", "--out", str(tmp_path / "f21.json")])
    assert factor_21 == 0 and json.loads((tmp_path / "f21.json").read_text())["factor"] in (3, 7)


def test_evolve_state_round_trip(tmp_path, bell):
    state = tmp_path / "state.json"
    dw = ["--circuit", bell, "--clock", "domain-wall"]
    assert main(["evolve", *dw, "--tf", "50", "--schedule", "smooth", "--save-state", str(state), "--out", str(tmp_path / "e.json")]) == 0
    jsonschema.validate(json.loads(state.read_text()), load_schema("state"))
    assert main(["verify", *dw, "--state", str(state), "--out", str(tmp_path / "v.json")]) == 0
    assert main(["sample", *dw, "--bases", "ZZ", "--state", str(state), "--out", str(tmp_path / "s.csv")]) == 0
    assert main(["verify", "--circuit", bell, "--clock", "unary", "--state", str(state)]) == 1
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "shot,clock_accept,outcome_bits"


def test_corpus_table(tmp_path):
    assert main(["corpus", "--format", "table", "--out", str(tmp_path / "t.txt")]) == 0
    text = (tmp_path / "t.txt").read_text()
    assert "FAIL" not in text and text.count("PASS") == 40


def test_corpus_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["corpus", "--out", str(a)]) == 0
    assert main(["corpus", "--jobs", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_domain_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.qc"
    bad.write_text("work 1 0\nX 3\n")
    assert main(["build", "--circuit", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert main(["build", "--circuit", str(tmp_path / "missing.qc")]) == 1
    assert main(["factor", "--N", "9"]) == 1
    wide = tmp_path / "wide.qc"
    wide.write_text("work 12 0\n" + "X 0\n" * 12)
    assert main(["build", "--circuit", str(wide), "--clock", "domain-wall"]) == 1


def test_usage_errors_exit_2(bell):
    assert main([]) == 2
    assert main(["gap", "--circuit", bell, "--bogus"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["sample", "--circuit", bell]) == 2


def test_scratch_directory(tmp_path, bell, monkeypatch):
    monkeypatch.setenv("STOQAQC_SCRATCH", str(tmp_path / "scratch"))
    assert main(["check-stoquastic", "--circuit", bell, "--out", "rel/out.json"]) == 0
    assert (tmp_path / "scratch" / "rel" / "out.json").exists()
    assert (tmp_path / "scratch" / "rel" / "out.json.meta.json").exists()


def test_stdout_output(bell, capsys):
    assert main(["check-stoquastic", "--circuit", bell]) == 0
    assert json.loads(capsys.readouterr().out)["ok"] is True


def test_module_entry_point(bell):
    proc = subprocess.run(
        [sys.executable, "-m", "stoqaqc", "unionjack", "--triangles", "1"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["triangles"][0]["clock"] == 1


def test_docs_schemas_mirror_package():
    docs = Path(__file__).resolve().parents[1] / "docs" / "schemas"
    for path in sorted(docs.glob("*.schema.json")):
        assert json.loads(path.read_text()) == load_schema(path.name.removesuffix(".schema.json"))
    assert len(list(docs.glob("*.schema.json"))) == 14
