import io
import json
import subprocess
import sys

import pytest

from qdl.cli import EXIT_ERROR, EXIT_FALSIFIED, EXIT_OK, EXIT_OPEN, main

from helpers import CORPUS, ROOT


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_prove_vacuous_box_exit_zero():
    code, out, _ = run("prove", CORPUS / "valid" / "vacuous.qdl", "--auto")
    assert code == EXIT_OK
    assert out.startswith("closed")


def test_prove_open_goal_exit_one(tmp_path):
    f = write(tmp_path, "p.qdl", "func R x(); problem: x > 0;")
    code, out, _ = run("prove", f, "--auto")
    assert code == EXIT_OPEN
    assert "goal 2 is what qe left of goal 1" in out and "where X$1=x" in out


def test_open_leaf_after_qe_explained():
    code, out, _ = run("prove", CORPUS / "fig5.qdl", "--tactic", CORPUS / "fig5.tac")
    assert code == EXIT_OPEN
    assert "is what qe left of goal" in out
    assert "where " in out and "x(j" in out


def test_parse_error_exit_two(tmp_path):
    f = write(tmp_path, "bad.qdl", "func R x(); problem: [x := ] x > 0;")
    code, _, err = run("prove", f, "--auto")
    assert code == EXIT_ERROR
    assert err.strip()


def test_sort_error_exit_two(tmp_path):
    f = write(tmp_path, "bad.qdl", "sort C; func R x(C); problem: x(1) > 0;")
    assert run("prove", f, "--auto")[0] == EXIT_ERROR


def test_missing_file_exit_two(tmp_path):
    assert run("prove", tmp_path / "nope.qdl")[0] == EXIT_ERROR


def test_falsify_exit_three_and_trace():
    code, out, _ = run("falsify", CORPUS / "invalid" / "inc.qdl", "--states", 50)
    assert code == EXIT_FALSIFIED
    v = json.loads(out)
    assert v["verdict"] == "falsified" and v["trace"]
    assert {"input_sha256", "profile", "bounds", "seed", "witness", "schema"} <= set(v)


def test_falsify_valid_exit_zero():
    code, out, _ = run("falsify", CORPUS / "valid" / "loop.qdl", "--states", 50)
    assert code == EXIT_OK
    assert json.loads(out)["verdict"] != "falsified"


def test_falsify_deterministic_and_seed_env(tmp_path, monkeypatch):
    f = CORPUS / "invalid" / "drift.qdl"
    r1, r2 = tmp_path / "a.json", tmp_path / "b.json"
    run("falsify", f, "--seed", 7, "--report", r1)
    run("falsify", f, "--seed", 7, "--report", r2)
    assert r1.read_bytes() == r2.read_bytes()
    monkeypatch.setenv("QDL_SEED", "7")
    assert run("falsify", f)[1] == run("falsify", f, "--seed", 7)[1]


def test_prove_report_byte_identical(tmp_path):
    r1, r2 = tmp_path / "a.json", tmp_path / "b.json"
    for r in (r1, r2):
        run("prove", CORPUS / "valid" / "loop.qdl", "--auto", "--report", r)
    assert r1.read_bytes() == r2.read_bytes()
    rep = json.loads(r1.read_text())
    assert rep["outcome"] == "closed" and rep["open_goals"] == []
    assert "timings" not in json.dumps(rep)


def test_qe_command():
    code, out, _ = run("qe", "forall R y. a(i) < y^2")
    assert code == EXIT_OK and out.strip() == "a(i) < 0"
    assert run("qe", "exists R x. x > a & x < b")[1].strip() == "a < b"


def test_qe_rejects_nonlinear_with_name():
    code, _, err = run("qe", "exists R x. exists R y. x^2*y^2 + x*y = c")
    assert code == EXIT_ERROR
    assert "x" in err or "y" in err


def test_qe_rejects_modalities():
    assert run("qe", "[x := 1] x > 0")[0] == EXIT_ERROR


def test_check_proof_roundtrip_and_tamper(tmp_path):
    prob = CORPUS / "valid" / "loop.qdl"
    pj = tmp_path / "proof.json"
    assert run("prove", prob, "--auto", "--json", pj)[0] == EXIT_OK
    assert run("check-proof", prob, pj)[0] == EXIT_OK
    assert run("check-proof", CORPUS / "valid" / "inc.qdl", pj)[0] == EXIT_ERROR
    data = json.loads(pj.read_text())
    assert data["closed"] and data["edges"]
    truncated = dict(data, steps=data["steps"][:-1])
    assert run("check-proof", prob, write(tmp_path, "short.json", json.dumps(truncated)))[0] == EXIT_OPEN
    steps = list(data["steps"])
    steps[0] = steps[0].replace(steps[0].split()[2], "andr", 1)
    bad = write(tmp_path, "bad.json", json.dumps(dict(data, steps=steps)))
    code, _, err = run("check-proof", prob, bad)
    assert code == EXIT_ERROR and "step 1" in err
    assert run("check-proof", prob, write(tmp_path, "junk.json", "{"))[0] == EXIT_ERROR


def test_check_proof_open_exit_one(tmp_path):
    prob = CORPUS / "fig5.qdl"
    pj = tmp_path / "proof.json"
    run("prove", prob, "--tactic", CORPUS / "fig5.tac", "--json", pj)
    assert run("check-proof", prob, pj)[0] == EXIT_OPEN


def test_hints_supply_invariant(tmp_path):
    f = write(tmp_path, "p.qdl", "func R x();\nproblem: x >= 0 -> [(x := x + 1)*@up]x >= 0;\n")
    h = write(tmp_path, "h.qdl", "invariant up: x >= 0;\n")
    assert run("prove", f, "--auto", "--hints", h)[0] == EXIT_OK


def test_print_script_replays(tmp_path):
    prob = CORPUS / "valid" / "choice.qdl"
    code, out, _ = run("prove", prob, "--auto", "--print-script")
    assert code == EXIT_OK
    tac = write(tmp_path, "s.tac", "\n".join(l for l in out.splitlines() if l.startswith("goal ")) + "\n")
    assert run("prove", prob, "--tactic", tac)[0] == EXIT_OK


@pytest.mark.parametrize("name", sorted(p.name for p in (CORPUS / "valid").glob("*.qdl")))
def test_fmt_is_a_fixed_point(tmp_path, name):
    code, once, _ = run("fmt", CORPUS / "valid" / name)
    assert code == EXIT_OK
    again = run("fmt", write(tmp_path, name, once))[1]
    assert again == once


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qdl", "qe", "true"], capture_output=True, text=True, cwd=ROOT)
    assert r.returncode == 0 and r.stdout.strip() == "true"
