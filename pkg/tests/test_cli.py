import json
import subprocess
import sys

import pytest

import thetahecke.qanalog as qanalog
from thetahecke.cli import main


def run(*args):
    return subprocess.run([sys.executable, "-m", "thetahecke.cli", *args], capture_output=True, text=True)


@pytest.fixture
def lat(lattice_dir):
    return lambda name: str(lattice_dir / f"{name}.txt")


def test_theta_e8(lat, capsys):
    assert main(["theta", "--lattice", lat("e8"), "--n", "1", "--bound", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    values = [e["coefficient"] for e in doc["records"]]
    assert values == ["1/1", "240/1", "2160/1"]


def test_repeated_runs_are_byte_identical(lat, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        r = run("verify", "--theorem", "thm23", "--lattice", lat("a1a1"), "--p", "5", "--n", "1",
                "--j", "1", "--bound", "4", "--out", str(out))
        assert r.returncode == 0, r.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_verify_passes(lat, tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--theorem", "thm33", "--lattice", lat("a2"), "--p", "2", "--n", "1",
                 "--j", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["theorem"] == "thm33" and doc["passed"]


def test_verify_failure_exit_code(lat, tmp_path):
    # the vanishing statement does not hold for diag(2,2) at p = 5, n = 2, j = 2
    out = tmp_path / "r.json"
    assert main(["verify", "--theorem", "thm33", "--lattice", lat("a1a1"), "--p", "5", "--n", "2",
                 "--j", "2", "--bound", "2", "--out", str(out)]) == 1
    assert not json.loads(out.read_text())["passed"]


def test_malformed_lattice_writes_nothing(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n2 1\n3 2\n")
    out = tmp_path / "o.json"
    assert main(["theta", "--lattice", str(bad), "--bound", "2", "--out", str(out)]) == 2
    assert not out.exists()


def test_prime_dividing_level(lat, tmp_path):
    out = tmp_path / "o.json"
    assert main(["hecke-apply", "--op", "tp", "--lattice", lat("a2"), "--p", "3", "--bound", "2",
                 "--out", str(out)]) == 2
    assert not out.exists()


def test_index_out_of_range(lat, tmp_path):
    out = tmp_path / "o.json"
    assert main(["verify", "--theorem", "cor24", "--lattice", lat("d4"), "--p", "3", "--n", "2",
                 "--j", "3", "--out", str(out)]) == 2
    assert not out.exists()


def test_hecke_apply_roundtrip(lat, tmp_path, capsys):
    theta = tmp_path / "t.json"
    assert main(["theta", "--lattice", lat("e8"), "--n", "1", "--bound", "8", "--out", str(theta)]) == 0
    assert main(["hecke-apply", "--op", "tp", "--lattice", lat("e8"), "--p", "2", "--in", str(theta)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [e["coefficient"] for e in doc["records"]] == ["9/1", "2160/1", "19440/1"]


def test_witt_and_phi(lat, capsys):
    assert main(["witt", "--lattice", lat("a1a1a2"), "--p", "5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["chi"] == -1 and doc["residual"] == "ANISO_PLANE"
    assert main(["phi-count", "--lattice", lat("d4"), "--p", "3", "--j", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["closed_form"] == doc["enumerated"] == "8/1" and doc["ok"]


def test_identity_check_passes(capsys):
    assert main(["identity-check", "--theorem", "lemma42", "--p", "2"]) == 0
    assert capsys.readouterr().out.startswith("suite,identity")


def test_identity_check_detects_mutated_beta(monkeypatch, capsys):
    real = qanalog.beta
    monkeypatch.setattr(qanalog, "beta", lambda p, m, r: real(p, m, r) + (r == 2 and m >= 3))
    assert main(["identity-check", "--theorem", "lemma42", "--p", "2"]) == 1
    assert "violation" in capsys.readouterr().err


def test_bad_thread_hint(lat, monkeypatch):
    monkeypatch.setenv("THETA_HECKE_THREADS", "zero")
    assert main(["witt", "--lattice", lat("d4"), "--p", "3"]) == 2
