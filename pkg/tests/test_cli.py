import json
import subprocess
import sys

import pytest

from threeweb.cli import Report, run


def call(capsys, *argv):
    code, rep = run(list(argv))
    out = capsys.readouterr()
    return code, rep, out.out, out.err


def test_flat_constant_web(capsys):
    code, rep, out, _ = call(capsys, "webcurv", "--slopes", "0;1;2", "--at", "0,0")
    assert code == 0
    assert rep.payloads["K"] == "0" and rep.payloads["K_at"] == "0"
    assert rep.payloads["j3K"] == "[" + ", ".join(["0"] * 10) + "]"
    assert "ok: true" in out


def test_coincident_slopes_exit_2(capsys):
    code, rep, out, err = call(capsys, "webcurv", "--slopes", "0;1;1")
    assert code == 2 and rep is None
    assert "slopes not pairwise distinct" in err


@pytest.mark.parametrize("argv", [
    ["webcurv", "--slopes", "0;1"],
    ["webcurv", "--slopes", "0;1;x", "--at", "0,0"],
    ["webcurv", "--slopes", "0;1;2", "--forms", "0,1;1,1;2,1"],
    ["webcurv", "--slopes", "0;1;2", "--at", "1"],
    ["simplify", "x^^2"],
    ["simplify", "1/(x - x)"],
    ["gronwall", "--case", "three-pencil"],
    ["gronwall", "--check", "bogus"],
    ["gronwall", "--check", "qmatrix"],
    ["burgers", "--init", "y"],
    ["linearize", "--slopes", "0;1;1;2"],
])
def test_input_errors_exit_2(capsys, argv):
    code, _, _, err = call(capsys, *argv)
    assert code == 2 and "error" in err


def test_simplify(capsys):
    code, rep, _, _ = call(capsys, "simplify", "(x^2 - y^2)/(x - y)", "--at", "1,2")
    assert code == 0 and rep.payloads["canonical"] == "x + y" and rep.payloads["value"] == "3"


def test_forms_input(capsys):
    code, rep, _, _ = call(capsys, "webcurv", "--forms", "0,1;-1,1;-2,1")
    assert code == 0 and rep.payloads["flat"] == "true"


def test_linearize_fit_fails_L1(capsys):
    code, rep, _, _ = call(capsys, "linearize", "--slopes", "0;1;2;x")
    assert code == 1
    assert rep.verdicts["leaves_are_solutions"][0] and not rep.verdicts["L1_zero"][0]
    assert rep.payloads["fitted_ode"].count(";") == 3


def test_linearize_with_ode(capsys):
    code, rep, _, _ = call(capsys, "linearize", "--slopes", "0;dual:0;y/(1 + x)", "--ode", "0;0;0;0")
    assert code == 0


def test_burgers(capsys):
    code, rep, _, _ = call(capsys, "burgers", "--init", "1 + y^5", "--order", "12", "--s", "2")
    assert code == 0
    assert rep.payloads["vanishing_order"] == "3"
    assert rep.verdicts["curvature_ideal_description"][0]


def test_gronwall_two_pencil_closure(capsys):
    code, rep, _, _ = call(capsys, "gronwall", "--case", "two-pencil", "--check", "closure")
    assert code == 0
    assert rep.verdicts["dB1_closure"][0] and rep.verdicts["xxx7"][0]


def test_gronwall_all_checks(capsys):
    code, rep, _, _ = call(capsys, "gronwall", "--case", "two-pencil", "--check", "all")
    assert code == 0
    assert rep.payloads["q_support"] == "T_{0,0},T_{1,-1},A_4,A_{4,0},A_5"
    assert rep.payloads["K"] == "-T_{0,0}"
    assert rep.payloads["leading_strict_grading_failures"] == "B_4/omega,B_5/theta"


def test_deformation(capsys):
    code, rep, _, _ = call(capsys, "deformation")
    assert code == 0 and set(rep.verdicts) == {"fundamental_identity", "sigma_covariance",
                                               "linearity_solutions", "d_squared_consistent"}


def test_every_verdict_has_an_anchor(capsys):
    for argv in (["deformation"], ["gronwall", "--check", "all"], ["burgers", "--init", "1 + y^4", "--s", "1"]):
        _, rep, _, _ = call(capsys, *argv)
        assert rep.verdicts and all(anchor for _, anchor in rep.verdicts.values())


def test_table_dump_and_load(capsys, tmp_path):
    path = tmp_path / "table.txt"
    code, rep, _, _ = call(capsys, "gronwall", "--check", "eq6", "--dump-table", str(path))
    assert code == 0
    code2, rep2, _, _ = call(capsys, "gronwall", "--check", "eq6", "--load-table", str(path))
    assert code2 == 0 and rep2.hashes["eq6"] == rep.hashes["eq6"]
    assert rep2.hashes["table"] == rep.hashes["table"]
    path.write_text(path.read_text().replace("B_1", "B_2", 1))
    code3, _, _, err = call(capsys, "gronwall", "--load-table", str(path))
    assert code3 == 2 and "hash mismatch" in err


def test_json_round_trip_and_determinism(capsys):
    argv = ["gronwall", "--check", "d2,eq6,data", "--json"]
    _, rep, out1, _ = call(capsys, *argv)
    _, _, out2, _ = call(capsys, *argv)
    assert out1 == out2
    back = Report.from_json(out1)
    assert back.to_json() == out1 and back.to_text() == rep.to_text()
    assert json.loads(out1)["ok"] is True


def test_text_output_is_sorted(capsys):
    _, _, out, _ = call(capsys, "burgers", "--init", "1 + y^4", "--s", "1")
    keys = [line.split(":")[0] for line in out.splitlines() if line.startswith("verdict.")]
    assert keys == sorted(keys)


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "threeweb.cli", "webcurv", "--slopes", "0;1;1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
