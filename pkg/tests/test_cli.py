import json

import pytest

from mapkit import statedoc
from mapkit.cli import main
from mapkit.lang import corpus_path

from conftest import DELTA_A

PLAN = "; ".join(DELTA_A)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check(capsys):
    code, out, _ = run(capsys, "check", "corpus:coin_box.mad")
    assert code == 0 and out.strip() == "OK, 21 actions (grounded), 3 agents"


def test_check_reports_errors(capsys, tmp_path):
    p = tmp_path / "bad.mad"
    p.write_text("agents A\nfluents f\nactions a\na causes f\na determines f\n")
    code, out, _ = run(capsys, "check", str(p))
    assert code == 2 and "error:" in out


def test_parse_error_exit_status(capsys, tmp_path):
    p = tmp_path / "bad.mad"
    p.write_text("agents A\nfluents f\nactions a\na causes g\n")
    code, _, err = run(capsys, "check", str(p))
    assert code == 1 and "undeclared fluent" in err
    code, _, _ = run(capsys, "check", str(tmp_path / "missing.mad"))
    assert code == 1


def test_usage_error_exit_status(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["exec", "corpus:coin_box.mad"])
    assert exc.value.code == 1


def test_init(capsys):
    code, out, _ = run(capsys, "init", "--cwa", "corpus:coin_box.mad")
    assert code == 0
    assert out.startswith("2 initial states over 1 structure(s) with [2] worlds")


def test_init_json_and_dot(capsys, tmp_path):
    code, out, err = run(capsys, "init", "--cwa", "--out", "json", "--dot-dir", str(tmp_path), "corpus:flip.mad")
    assert code == 0 and "initial states" in err
    states = statedoc.loads(out)
    assert len(states) == 1 and len(states[0].structure.worlds) == 2
    assert (tmp_path / "init_0.dot").read_text().startswith("digraph")
    code, out, _ = run(capsys, "init", "--out", "dot", "corpus:flip.mad")
    assert out.count("digraph") == 1


def test_init_inconsistent(capsys, tmp_path):
    p = tmp_path / "x.mad"
    p.write_text("agents A\nfluents f\ninitially f\ninitially C(!f)\n")
    code, _, err = run(capsys, "init", str(p))
    assert code == 2 and "InconsistencyError" in err


def test_exec_trace(capsys):
    code, out, _ = run(capsys, "exec", "--trace", "--point", "0", "corpus:coin_box.mad", PLAN)
    assert code == 0
    counts = [int(line.split(": ")[1].split()[0]) for line in out.splitlines() if line.startswith("step")]
    assert counts == [2, 4, 8, 16, 32]


def test_exec_failed(capsys):
    code, out, _ = run(capsys, "exec", "corpus:coin_box_strict.mad", PLAN)
    assert code == 3 and "signal(A,B)" in out


def test_exec_with_state_document(capsys, tmp_path):
    doc = tmp_path / "s.json"
    doc.write_text(statedoc.dumps(statedoc.load(corpus_path("sensing_ignorant.json"))))
    code, out, _ = run(capsys, "exec", "--state", str(doc), "--show", "--out", "json",
                       "corpus:sensing_ignorant.mad", "a")
    assert code == 0
    (final,) = json.loads(out)["states"]
    assert len(final["worlds"]) == 4
    code, _, err = run(capsys, "exec", "--state", str(doc), "corpus:flip.mad", "flip")
    assert code == 2 and "SignatureError" in err


def test_query(capsys):
    code, out, _ = run(capsys, "query", "corpus:coin_box.mad", "corpus:coin_box.maq")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 3 and all(line.startswith("true") for line in lines)
    code, out, _ = run(capsys, "query", "--explain", "corpus:coin_box.mad", f"B[C] (B[A] tail | B[A] !tail) after {PLAN}")
    assert out.startswith("false") and "witness" in out and "via C" in out
    code, out, _ = run(capsys, "query", "corpus:coin_box.mad", "C(!opened) after []")
    assert out.startswith("true")
    code, out, _ = run(capsys, "query", "corpus:coin_box.mad", "true after open(B)")
    assert "(plan fails)" in out


def test_crosscheck(capsys):
    code, out, _ = run(capsys, "crosscheck", "--cases", "30", "--seed", "7", "--max-states", "10", "corpus:flip.mad")
    assert code == 0 and "0 fail" in out and "unsupported-shape" in out
    again = run(capsys, "crosscheck", "--cases", "30", "--seed", "7", "--max-states", "10", "corpus:flip.mad")[1]
    assert again.splitlines()[:2] == out.splitlines()[:2]
