import json
import subprocess
import sys
from fractions import Fraction

import pytest

from conftest import ONE_BRANCH, TWO_BRANCH
from treescm.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, main, parse_probability
from treescm.model import M1


@pytest.fixture
def model_file(tmp_path):
    def write(m, name="model.json"):
        path = tmp_path / name
        path.write_text(m.to_json(), encoding="utf-8")
        return str(path)
    return write


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("text, value", [("2^-40", Fraction(1, 2**40)), ("2**-10", Fraction(1, 1024)),
                                         ("1/1000", Fraction(1, 1000)), ("1e-3", Fraction(1, 1000))])
def test_parse_probability(text, value):
    assert parse_probability(text) == value


def test_identify_json(model_file, capsys):
    code, out, _ = run(["identify", model_file(M1), "--seed", "3"], capsys)
    assert code == EXIT_OK
    d = json.loads(out)
    assert [n["status"] for n in d["nodes"]] == ["identifiable", "identifiable"]
    assert d["diagnostics"]["pit"]["seed"] == 3


def test_output_is_byte_identical(model_file, tmp_path, capsys):
    path = model_file(ONE_BRANCH)
    outs = []
    for k in range(2):
        target = tmp_path / f"out{k}.json"
        assert main(["identify", path, "--seed", "12", "-o", str(target)]) == EXIT_OK
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_oracle_check_agrees(model_file, capsys):
    code, out, _ = run(["identify", model_file(TWO_BRANCH), "--oracle-check"], capsys)
    assert code == EXIT_OK
    oracle = json.loads(out)["oracle"]
    assert oracle["agrees"] and oracle["counts"] == {"1": 2, "2": 2, "3": 2}


def test_text_format_and_dot(model_file, tmp_path, capsys):
    dot = tmp_path / "eq.dot"
    code, out, _ = run(["identify", model_file(TWO_BRANCH), "--format", "text", "--oracle-check",
                        "--emit-dot", str(dot)], capsys)
    assert code == EXIT_OK
    assert "2-identifiable" in out and "oracle: agrees" in out
    text = dot.read_text()
    assert text.startswith("digraph") and "penwidth=3" in text


def test_equation_graph_command(model_file, capsys):
    code, out, _ = run(["equation-graph", model_file(TWO_BRANCH)], capsys)
    assert code == EXIT_OK and out.startswith("digraph") and "->" in out


def test_dot_input(tmp_path, capsys):
    path = tmp_path / "m1.dot"
    path.write_text("digraph { 0 -> 1; 1 -> 2; 1 -> 2 [dir=both]; }")
    code, out, _ = run(["identify", str(path)], capsys)
    assert code == EXIT_OK and json.loads(out)["model"]["n"] == 2


@pytest.mark.parametrize("extra", [["--prime", "101"], ["--prime", str(2**62 - 57 + 2)],
                                   ["--error-prob", "2"], ["--error-prob", "abc"], ["--seed", "-1"]])
def test_bad_options_exit_1(model_file, capsys, extra):
    code, _, _ = run(["identify", model_file(M1), *extra], capsys)
    assert code == EXIT_INPUT


def test_missing_and_malformed_inputs_exit_1(tmp_path, capsys):
    assert run(["identify", str(tmp_path / "nope.json")], capsys)[0] == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "parent": [null, 2, 1]}')
    code, _, err = run(["identify", str(bad)], capsys)
    assert code == EXIT_INPUT and "cycle" in err
    assert run(["frobnicate"], capsys)[0] == EXIT_INPUT


def test_budget_exhaustion_exit_2(model_file, capsys):
    code, _, err = run(["identify", model_file(TWO_BRANCH), "--error-prob", "2^-62"], capsys)
    assert code == EXIT_BUDGET and "budget" in err


def test_module_entry_point(model_file):
    proc = subprocess.run([sys.executable, "-m", "treescm", "identify", model_file(M1)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["nodes"][0]["fastp"] == "σ[0,1]/σ[0,0]"
