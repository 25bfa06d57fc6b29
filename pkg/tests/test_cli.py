import json
import subprocess
import sys
from pathlib import Path

import pytest

from spinsys.cli import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.filterwarnings("ignore::spinsys.errors.BoundaryTouchWarning")
@pytest.mark.parametrize("command", ["simulate", "converge", "duality", "growth",
                                     "generator-check", "norm-growth"])
def test_commands_are_reproducible(tmp_path, command):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = [command, "-c", str(CONFIGS / "contact.ini"), "--replicas", "10"]
    assert run(args + ["-o", str(a)]) == 0
    assert run(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "# C = 3.0" in text and "# A = 3.0" in text and "# lambda_inf = 1.0" in text
    assert "# [model]" in text


def test_seed_changes_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "-c", str(CONFIGS / "contact.ini"), "--replicas", "5"]
    run(args + ["-o", str(a), "--seed", "1"])
    run(args + ["-o", str(b), "--seed", "2"])
    assert a.read_bytes() != b.read_bytes()


def test_growth_columns(tmp_path):
    out = tmp_path / "g.csv"
    run(["growth", "-c", str(CONFIGS / "contact.ini"), "--replicas", "50", "-o", str(out)])
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert body[0] == "t,mean_q,sem,bound,boundary_touch_fraction,within_bound"
    assert len(body) == 4


def test_invariant_check(tmp_path, capsys):
    out = tmp_path / "i.csv"
    assert run(["invariant-check", "-c", str(CONFIGS / "independent.ini"), "-o", str(out)]) == 0
    assert out.read_text().splitlines()[-1] == "exact,0.0,0.0"
    assert run(["invariant-check", "-c", str(CONFIGS / "contact.ini")]) == 3


def test_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nkind = contact\nlambda_c = abc\n")
    assert run(["simulate", "-c", str(bad)]) == 3
    assert "model.lambda_c" in capsys.readouterr().err
    assert run(["simulate", "-c", str(tmp_path / "missing.ini")]) == 3


def test_hypothesis_rejection(tmp_path, capsys):
    cfg = tmp_path / "lr.ini"
    cfg.write_text("[model]\nkind = long_range_geometric\ntheta = 0.5\n"
                   "[weights]\nkind = exponential\nparam = 1.0\n")
    assert run(["growth", "-c", str(cfg)]) == 2
    assert "hypothesis rejected" in capsys.readouterr().err


def test_verify_all_independent(tmp_path):
    out = tmp_path / "m.json"
    assert run(["verify-all", "-c", str(CONFIGS / "independent.ini"), "-o", str(out)]) == 0
    manifest = json.loads(out.read_text())
    assert manifest["passed"] and manifest["suite"] == "model"
    assert {c["name"] for c in manifest["checks"]} >= {"lipschitz", "oracle", "containment",
                                                         "duality", "invariance"}


def test_verify_all_bad_influence(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert run(["verify-all", "-c", str(CONFIGS / "contact_bad_influence.ini"),
                "-o", str(out)]) == 1
    err = capsys.readouterr().err
    witness = json.loads(err.strip().splitlines()[-1])["witness"]
    assert witness[0]["name"] == "lipschitz"
    assert witness[0]["details"]["witness"]["rate_difference"] == 1.5


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "spinsys.cli", "verify-all", "-c",
                           str(CONFIGS / "contact_bad_influence.ini")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
