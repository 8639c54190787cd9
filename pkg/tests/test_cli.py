import json
from pathlib import Path

import pytest

from antideriv.cli import main
from antideriv.report import load_report


def run(tmp_path, *args, name="out.jsonl"):
    out = tmp_path / name
    rc = main(["--out", str(out), *args])
    return rc, out


def test_clean_suite_exits_zero(tmp_path):
    rc, out = run(tmp_path, "--suite", "constants")
    assert rc == 0
    meta, recs = load_report(out)
    assert meta["kind"] == "metadata"
    assert all(r["status"] in ("pass", "recorded") for r in recs.values())


def test_hard_failure_exits_one(tmp_path, capsys):
    # the constant moves with the smoothness order, so this hard check fails
    rc, _ = run(tmp_path, "--suite", "constants", "--smoothness", "1,2")
    assert rc == 1
    assert "FAIL constants.smoothness" in capsys.readouterr().err


@pytest.mark.parametrize("args", [["--prime", "2"], ["--precision", "3"], ["--suite", "nope"],
                                  ["--smoothness", "x"]])
def test_config_errors_exit_two(tmp_path, args):
    assert run(tmp_path, *args)[0] == 2


def test_reports_are_byte_identical(tmp_path):
    _, a = run(tmp_path, "--suite", "residues", name="a.jsonl")
    _, b = run(tmp_path, "--suite", "residues", name="b.jsonl")
    assert a.read_bytes() == b.read_bytes()


def test_golden_regression_exits_three(tmp_path):
    rc, golden = run(tmp_path, "--suite", "constants", name="golden.jsonl")
    assert rc == 0
    assert run(tmp_path, "--suite", "constants", "--golden", str(golden), name="again.jsonl")[0] == 0
    lines = golden.read_text().splitlines()
    for i, line in enumerate(lines):
        rec = json.loads(line)
        if rec.get("tier") == "experimental":
            rec["lhs"] = "tampered"
            lines[i] = json.dumps(rec)
            break
    golden.write_text("\n".join(lines) + "\n")
    rc, out = run(tmp_path, "--suite", "constants", "--golden", str(golden), name="third.jsonl")
    assert rc == 3
    assert any(r["status"] == "regress" for r in load_report(out)[1].values())


def eval_lines(capsys, *args):
    assert main(["eval", *args]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("# ")
    json.loads(out[0][2:])
    return out[1:]


def test_eval_residue(capsys):
    body = eval_lines(capsys, "residue", "--text", "1/(z1 - 3)", "--at", "3", "--k", "2")
    assert body[-1].startswith("1 0 0 0 0 0 0 0 0 0 0 0·3^0")


def test_eval_cauchy(capsys):
    body = eval_lines(capsys, "cauchy", "--text", "z1^2", "--at", "3")
    assert "3^2" in body[-1]


def test_eval_funcalc_needs_matrix():
    assert main(["eval", "funcalc", "--text", "z1^2", "--at", "0"]) == 2


def test_committed_golden_matches(tmp_path):
    golden = Path(__file__).resolve().parent.parent / "goldens" / "dbar-p3-N12.jsonl"
    assert run(tmp_path, "--suite", "dbar", "--golden", str(golden))[0] == 0
