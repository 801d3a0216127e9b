import json
import subprocess
import sys

import pytest

from latrec import fixture_path
from latrec.cli import main
from latrec.dsl import format_expression

from helpers import system_doc


def F(name):
    return str(fixture_path(name))


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_recursion_writes_the_operator_document(capsys, tmp_path):
    target = tmp_path / "kvm.op"
    status, out, _ = run(capsys, "recursion", F("kvm.dde"), "--out", str(target))
    assert status == 0
    assert target.read_text() == fixture_path("kvm.op").read_text()
    assert "PASS" in out


def test_hierarchy_one_step(capsys):
    status, out, _ = run(capsys, "hierarchy", F("kvm.dde"), "--operator", F("kvm.op"),
                         "--count", "1", "--format", "json")
    assert status == 0
    doc = system_doc("kvm")
    expected = format_expression(doc.symmetries[2][0], doc.names)
    assert json.loads(out)["result"]["hierarchy"] == [[expected]]


def test_verify_al_action(capsys):
    status, out, _ = run(capsys, "verify", F("al.dde"), "--operator", F("al_r1.op"),
                         "--mode", "action")
    assert status == 0 and "PASS" in out


def test_verify_failure_exits_one(capsys, tmp_path):
    data = json.loads(fixture_path("toda.op").read_text())
    data["entries"][0]["coeff"] = "2*u"
    bad = tmp_path / "bad.op"
    bad.write_text(json.dumps(data))
    status, out, _ = run(capsys, "verify", F("toda.dde"), "--operator", str(bad))
    assert status == 1 and "FAIL" in out


def test_mixed_sign_weights(capsys):
    status, _, err = run(capsys, "weights", F("al.dde"))
    assert status == 1 and "w(u) + w(v) = 0" in err
    status, out, _ = run(capsys, "weights", F("al.dde"), "--allow-nonpositive-weights")
    assert status == 0 and "w(u) = -1" in out


def test_parse_errors_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.dde"
    bad.write_text("u' = exp(u);\n")
    status, _, err = run(capsys, "weights", str(bad))
    assert status == 2 and "line 1, column 6" in err
    status, _, _ = run(capsys, "densities", F("kvm.dde"))  # missing --rank
    assert status == 2
    status, _, _ = run(capsys, "weights", str(tmp_path / "missing.dde"))
    assert status == 2


def test_format_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("LATREC_FORMAT", "json")
    status, out, _ = run(capsys, "weights", F("toda.dde"))
    assert status == 0
    assert json.loads(out)["result"]["weights"] == {"u": "1", "v": "2"}
    monkeypatch.setenv("LATREC_FORMAT", "yaml")
    status, _, err = run(capsys, "weights", F("toda.dde"))
    assert status == 2 and "LATREC_FORMAT" in err


def test_json_output_is_deterministic(capsys):
    outs = [run(capsys, "densities", F("toda.dde"), "--rank", "3", "--format", "json")[1]
            for _ in range(2)]
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["schema"] == "latrec.result"


def test_latex_output(capsys):
    status, out, _ = run(capsys, "recursion", F("toda.dde"), "--format", "latex")
    assert status == 0 and r"(\mathrm{D} - \mathrm{I})^{-1}" in out


def test_empty_density_list(capsys, tmp_path):
    sq = tmp_path / "sq.dde"
    sq.write_text("u' = u^2;\n")
    status, out, _ = run(capsys, "densities", str(sq), "--rank", "2", "--format", "json")
    assert status == 0 and json.loads(out)["result"]["densities"] == []


def test_window_flag(capsys):
    status, out, _ = run(capsys, "symmetries", F("kvm.dde"), "--level", "1", "--window=-1:1")
    assert status == 0 and out.startswith("G = ")
    status, _, _ = run(capsys, "symmetries", F("kvm.dde"), "--level", "1", "--window=1:-1")
    assert status == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "latrec.cli", "weights", F("kvm.dde")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "w(u) = 1\nw(D_t) = 1\n"
