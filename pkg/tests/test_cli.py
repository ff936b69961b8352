import csv
import io
import json
import math
import subprocess
import sys

import pytest

from actsig.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_signature_json(capsys):
    code, out, _ = run(capsys, "signature", "--activation", "relu", "--sigma", "1")
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["m1"] == pytest.approx(0.398942, abs=5e-7)
    assert rec["c_phi"] == 0 and rec["order"] == 160


def test_signature_identity_and_swish(capsys):
    _, out, _ = run(capsys, "signature", "--activation", "identity", "swish", "--sigma", "1", "0.5")
    recs = {(r["name"], r["sigma"]): r for r in json.loads(out)}
    assert recs[("identity", 1.0)]["m1"] == 0 and recs[("identity", 1.0)]["g1"] == 1
    # The reference table lists 0.118357 for swish m2 at sigma = 0.5; the integral is 0.0722.
    assert recs[("swish", 0.5)]["m2"] == pytest.approx(0.0722489, abs=1e-6)


def test_default_sigmas_and_csv(capsys):
    _, out, _ = run(capsys, "signature", "--activation", "tanh", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["sigma"]) for r in rows] == [0.5, 1.0, 2.0]
    assert rows[0]["c_phi"] == "inf"


def test_global_flags_anywhere(capsys, tmp_path):
    target = tmp_path / "o.json"
    code, out, _ = run(capsys, "--order", "120", "signature", "--activation", "relu", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())[0]["order"] == 120


def test_table_single_row(capsys):
    _, out, _ = run(capsys, "table", "--activations", "relu", "--sigmas", "2")
    lines = out.splitlines()
    assert lines[0] == "activation,sigma,m1,g1,g2,m2,eta"
    assert len(lines) == 2
    vals = [float(v) for v in lines[1].split(",")[2:]]
    assert vals == pytest.approx([0.797885, 0.5, 0.707107, 2.0, 2.0], abs=5e-7)


def test_table_sorted_full(capsys):
    _, out, _ = run(capsys, "table")
    rows = [line.split(",")[:2] for line in out.splitlines()[1:]]
    assert len(rows) == 21
    assert rows == sorted(rows, key=lambda r: (r[0], float(r[1])))


def test_table_golden_reports_deviation(capsys):
    code, _, err = run(capsys, "table", "--golden", "--activations", "relu")
    assert code == 0 and "PASS" in err
    code, _, err = run(capsys, "table", "--golden")
    assert "max |deviation|" in err
    assert code == (0 if "PASS" in err else 3)


def test_table_order_convergence(capsys):
    _, a, _ = run(capsys, "--order", "120", "table")
    _, b, _ = run(capsys, "--order", "160", "table")
    for ra, rb in zip(csv.reader(io.StringIO(a)), csv.reader(io.StringIO(b))):
        if ra[0] == "activation":
            continue
        for x, y in zip(map(float, ra[2:]), map(float, rb[2:])):
            assert abs(x - y) <= 1e-6 * max(abs(y), 1e-9)


def test_classify(capsys):
    _, out, _ = run(capsys, "classify", "--activation", "tanh", "poly(3)")
    recs = json.loads(out)
    assert recs[0]["taxonomy"] == "A0 (bounded, saturating)"
    assert recs[1]["class"] == "A_gt1"


def test_mc(capsys):
    code, out, _ = run(capsys, "mc", "--activation", "relu", "--sigma", "1", "--samples", "300000", "--seed", "42")
    recs = json.loads(out)
    assert code == 0 and len(recs) == 5
    assert all(abs(r["z_score"]) < 4 for r in recs)
    assert {"component", "value", "std_error", "samples", "seed", "quadrature_ref", "z_score"} <= set(recs[0])


def test_propagate(capsys):
    code, out, _ = run(capsys, "propagate", "--activation", "relu", "--sigma-w", "1", "--sigma-b", "0.5")
    doc = json.loads(out)
    assert code == 0 and doc["q_star"] == pytest.approx(0.5) and doc["variance_stable"]
    code, _, _ = run(capsys, "propagate", "--activation", "relu", "--sigma-w", "2")
    assert code == 4


def test_criticality(capsys):
    code, out, _ = run(capsys, "criticality", "--activation", "relu", "--sigma-w", "1:2:41", "--sigma-b", "0.1:0.1:1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 41
    stable = [(float(r["sigma_w"]), r["variance_stable"] == "true") for r in rows]
    flip = [i for i in range(40) if stable[i][1] != stable[i + 1][1]]
    assert len(flip) == 1 and stable[flip[0]][0] < math.sqrt(2) < stable[flip[0] + 1][0]


def test_lyapunov_exit_codes(capsys):
    code, out, _ = run(capsys, "lyapunov", "--activation", "tanh", "--a", "0.5")
    doc = json.loads(out)
    assert doc["L_T"] == 0.5 and doc["c"] == 1.5 and doc["x_star"] == 0
    assert code == 3 and doc["violations"]
    code, out, _ = run(capsys, "lyapunov", "--activation", "tanh", "--a", "0.5", "--c", "0.1666",
                       "--f-lambda", "0.5", "--f-flipped")
    assert code == 0 and json.loads(out)["f_based"]["passed"]


def test_kernel_bound(capsys):
    code, out, _ = run(capsys, "kernel-bound", "--activation", "relu", "--trials", "3", "--samples", "20000")
    assert code == 0 and all(r["satisfied"] for r in json.loads(out))


def test_bias_drift(capsys):
    code, out, _ = run(capsys, "bias-drift", "--activation", "relu", "swish", "--sigma", "1")
    recs = json.loads(out)
    assert code == 0 and all(r["holds"] for r in recs)
    assert recs[0]["crude_m1_bound"] == "inf"


@pytest.mark.parametrize(
    "argv",
    [
        ["signature", "--activation", "nope"],
        ["signature", "--activation", "relu", "--sigma", "-1"],
        ["signature", "--activation", "leaky_relu(2)"],
        ["bias-drift", "--activation", "poly(3)"],
        ["criticality", "--activation", "relu", "--sigma-w", "1:2", "--sigma-b", "0"],
        ["mc", "--activation", "relu", "--samples", "10"],
        ["signature", "--activation", "relu", "--seed", "-4"],
    ],
)
def test_argument_errors_exit_2(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    capsys.readouterr()
    assert code == 2


def test_byte_identical(capsys):
    argv = ["mc", "--activation", "gelu", "--samples", "5000", "--seed", "3"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "actsig.cli", "classify", "--activation", "sigmoid"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)[0]["taxonomy"] == "A0 (bounded, saturating)"
