import csv
import io
import json
import subprocess
import sys

import pytest

from caepp.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_depolarizing_075_rows(capsys):
    code, out, _ = run(["trajectory", "--channel", "depolarizing", "--p00", "0.75", "--m", "1", "--rounds", "2"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "round,fidelity,p_succ,cum_succ"
    rows = table(out)
    assert [round(float(r["fidelity"]), 3) for r in rows] == [0.788, 0.841]
    assert "\r" not in out


def test_flip_and_noiseless_trajectories(capsys):
    _, out, _ = run(["trajectory", "--channel", "flip", "--p00", "0.75", "--m", "1", "--rounds", "8"], capsys)
    assert float(table(out)[-1]["fidelity"]) >= 0.9999
    _, out, _ = run(["trajectory", "--channel", "custom:1,0,0,0", "--m", "1", "--rounds", "2"], capsys)
    assert table(out)[1]["fidelity"] == "1"


def test_twelve_significant_digits(capsys):
    _, out, _ = run(["trajectory", "--p00", "0.75", "--rounds", "1"], capsys)
    assert table(out)[0]["fidelity"] == "0.788461538462"


def test_json_output(capsys):
    _, out, _ = run(["trajectory", "--p00", "0.8", "--rounds", "3", "--format", "json"], capsys)
    data = json.loads(out)
    assert len(data) == 3 and all(list(d) == ["round", "fidelity", "p_succ", "cum_succ"] for d in data)


def test_fixed_point(capsys):
    _, out, _ = run(["fixed-point", "--p00", "0.75"], capsys)
    row = table(out)[0]
    assert abs(float(row["F_star"]) - 0.863) < 2e-3 and row["status"] == "converged"
    _, out, _ = run(["fixed-point", "--p00", "0.75", "--m", "2"], capsys)
    assert float(table(out)[0]["F_star"]) > 0.95
    _, out, _ = run(["fixed-point", "--channel", "flip", "--p00", "0.75"], capsys)
    row = table(out)[0]
    assert float(row["F_star"]) == pytest.approx(1.0, abs=1e-12) and row["bound_3B_2C"] == ""


def test_fixed_point_large_star_uses_closed_form(capsys):
    code, out, _ = run(["fixed-point", "--p00", "0.7", "--m", "15"], capsys)
    assert code == 0 and table(out)[0]["within_bound"] == "true"


def test_fixed_point_failure_exit_code(capsys):
    code, out, err = run(["fixed-point", "--p00", "0.75", "--protocol", "twepp", "--twepp-variant", "dejmps",
                          "--max-iter", "2"], capsys)
    assert code == 3 and table(out)[0]["status"] == "not_converged" and "error" in err


def test_trajectory_abort_exit_code(capsys):
    code, out, _ = run(["trajectory", "--channel", "custom:0,0,1,0", "--state", "0,1,0,0", "--no-preprocess",
                        "--rounds", "3"], capsys)
    assert code == 3 and table(out) == []


def test_sweep(capsys):
    _, out, _ = run(["sweep-m", "--p00", "0.53,1.0", "--m-max", "40"], capsys)
    rows = table(out)
    assert list(rows[0]) == ["p00", "m", "F_star", "infidelity", "bound_3B_2C"]
    low = [float(r["F_star"]) for r in rows if r["p00"] == "0.53"]
    assert all(b >= a for a, b in zip(low, low[1:]))
    last = [r for r in rows if r["p00"] == "0.53"][-1]
    assert float(last["infidelity"]) <= float(last["bound_3B_2C"])
    assert all(r["F_star"] == "1" for r in rows if r["p00"] == "1")


def test_noise_compare(capsys):
    _, out, _ = run(["noise-compare", "--e-range", "0:0.2:5", "--f-range", "0:0.2:5"], capsys)
    rows = table(out)
    assert len(rows) == 2 * 4 * 5
    assert all(float(r["caepp_F1"]) >= float(r["twepp_F1"]) for r in rows)
    clean = [r for r in rows if float(r["e"]) == 0 and float(r["f"]) == 0]
    assert all(r["caepp_F1"] == r["twepp_F1"] for r in clean)


def test_ghz(capsys):
    _, out, _ = run(["ghz", "--ab", "custom:1,0,0,0", "--ac", "custom:1,0,0,0"], capsys)
    row = table(out)[0]
    assert row["p_succ"] == "1" and row["F_after"] == "1"
    _, out, _ = run(["ghz", "--ab", "depolarizing:0.75", "--ac", "depolarizing:0.75", "--rounds", "2"], capsys)
    assert [r["extrapolated"] for r in table(out)] == ["false", "true"]


def test_ghz_abort_row(capsys):
    code, out, _ = run(["ghz", "--ab", "custom:1,0,0,0", "--ac", "custom:1,0,0,0", "--state", "0,0,0,0,1,0,0,0"], capsys)
    assert code == 3 and table(out)[0]["status"] == "aborted"


def test_oracle_check(capsys):
    code, out, _ = run(["oracle-check", "--grid", "2"], capsys)
    assert code == 0 and all(r["passed"] == "true" for r in table(out))


def test_custom_code_matches_star(capsys):
    _, custom, _ = run(["trajectory", "--code", "custom:X1 X2,Z0 Z1 Z2", "--circuit", "H 1; CNOT 1 2; CNOT 0 2",
                        "--p00", "0.8", "--rounds", "3"], capsys)
    _, star, _ = run(["trajectory", "--code", "star", "--m", "2", "--p00", "0.8", "--rounds", "3"], capsys)
    assert custom == star


def test_eb_warning(capsys):
    code, _, err = run(["trajectory", "--p00", "0.45", "--rounds", "1"], capsys)
    assert code == 0 and "entanglement breaking" in err


@pytest.mark.parametrize("argv", [
    ["trajectory", "--code", "bogus", "--p00", "0.7"],
    ["trajectory", "--channel", "depolarizing"],
    ["trajectory", "--p00", "0.7", "--rounds", "0"],
    ["trajectory", "--p00", "0.7", "--code", "pairwise", "--m", "3"],
    ["trajectory", "--p00", "0.7", "--protocol", "twepp", "--m", "2"],
    ["trajectory", "--p00", "0.7", "--rou", "2"],
    ["trajectory", "--channel", "custom:0.5,0.5", "--p00", "0.7"],
    ["fixed-point", "--p00", "0.7", "--code", "pairwise", "--m", "12"],
    ["noise-compare", "--e-range", "0:1"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_byte_identical_across_processes():
    cmd = [sys.executable, "-m", "caepp", "sweep-m", "--p00", "0.6,0.7", "--m-max", "6"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True, env={"CAEPP_WORKERS": "2", "PATH": ""}).stdout
    assert first == second and first.endswith(b"\n")
