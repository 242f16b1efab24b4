import csv
import io
import subprocess
import sys

import pytest

from stochround.cli import EXIT_CONFIG, EXIT_OK, EXIT_RANGE, EXIT_SUITE_FAILED, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# stochround ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_provenance_line(capsys):
    code, out, _ = run(capsys, "bias-table", "--n", "20", "--seed", "42")
    assert code == EXIT_OK
    head = out.splitlines()[0]
    assert '"command":"bias-table"' in head and '"n":20' in head and head.endswith("seed=42")


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("SR_SEED", "777")
    _, out, _ = run(capsys, "integrate", "--n-list", "20", "--samples", "2")
    assert out.splitlines()[0].endswith("seed=777")
    _, out2, _ = run(capsys, "integrate", "--n-list", "20", "--samples", "2", "--seed", "777")
    assert out == out2
    _, out3, _ = run(capsys, "integrate", "--n-list", "20", "--samples", "2", "--seed", "1")
    assert out3 != out


def test_bias_table_dyadic_zero(capsys):
    _, out, _ = run(capsys, "bias-table", "--n", "4")
    data = rows(out)
    assert len(data) == 2
    assert all(float(r["theta"]) == 0 and float(r["predicted_bias"]) == 0 for r in data)


def test_integrate_dyadic_errors_zero(capsys):
    _, out, _ = run(capsys, "integrate", "--n-list", "1024", "--samples", "5")
    data = rows(out)
    assert {r["mode"] for r in data} == {"sr-nearness", "sr-up-or-down", "rn"}
    assert sum(r["mode"] == "rn" for r in data) == 1
    assert all(float(r["error"]) == 0 for r in data)


def test_integrate_up_or_down_bias(capsys):
    _, out, _ = run(capsys, "integrate", "--n-list", "20", "--samples", "10000",
                    "--modes", "sr-up-or-down", "--seed", "12345")
    data = rows(out)
    errs = [float(r["final_step_error"]) for r in data]
    n = len(errs)
    mean = sum(errs) / n
    se = (sum((e - mean) ** 2 for e in errs) / (n - 1)) ** 0.5 / n ** 0.5
    assert abs(mean - float(data[0]["predicted_bias"])) <= 3 * se


def test_x_sweep_structure(capsys):
    _, out, _ = run(capsys, "horner-x-sweep", "--x-grid", "1/8:1:5", "--samples", "4", "--lambda", "1/2")
    data = rows(out)
    kinds = [r["kind"] for r in data if r["point"] == "0"]
    assert kinds == ["rn", "sr", "sr", "sr", "sr", "mean_of_values", "mean_of_errors"]
    assert float(data[0]["x"]) == 0.125 and float(data[-1]["x"]) == 1.0
    for r in data:
        assert float(r["error"]) <= float(r["det_bound"])


def test_n_sweep_degree_zero(capsys):
    _, out, _ = run(capsys, "horner-n-sweep", "--n-list", "0,4", "--samples", "3", "--x", "24/26")
    data = [r for r in rows(out) if r["N"] == "0"]
    assert data and all(float(r["error_over_cond"]) == 0 for r in data)
    assert all(float(r["det_over_cond"]) == 0 and float(r["prob_over_cond"]) == 0 for r in data)


def test_n_sweep_rounds_wide_coefficients(capsys):
    _, out, _ = run(capsys, "horner-n-sweep", "--n-list", "36,40", "--samples", "2")
    flags = {r["N"]: r["coeffs_rounded"] for r in rows(out)}
    assert flags == {"36": "0", "40": "1"}


@pytest.mark.parametrize(
    "argv",
    [
        ["bias-table", "--n", "1"],
        ["bias-table"],
        ["bias-table", "--n", "20", "--unknown"],
        ["integrate", "--samples", "0"],
        ["horner-x-sweep", "--poly", "chebyshev:3"],
        ["horner-x-sweep", "--lambda", "1.5"],
        ["horner-n-sweep", "--x", "abc"],
        ["integrate", "--modes", "toward-zero"],
        ["frobnicate"],
    ],
)
def test_config_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_CONFIG and err


def test_range_error_exit(capsys):
    code, _, err = run(capsys, "integrate", "--n-list", "100000", "--format", "p4", "--modes", "rn")
    assert code == EXIT_RANGE and "range" in err


def test_verify_lemma1(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "lemma1", "--trials", "100000")
    assert code == EXIT_OK and out.startswith("PASS floor-scaling")


def test_verify_detects_injected_fault(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "unbiasedness", "--inject-bug")
    assert code == EXIT_SUITE_FAILED and out.startswith("FAIL unbiasedness")


def test_inject_flag_is_hidden(capsys):
    with pytest.raises(SystemExit):
        main(["verify", "--help"])
    assert "inject" not in capsys.readouterr().out


def test_svg_output(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    svg = tmp_path / "t.svg"
    code, _, _ = run(capsys, "horner-n-sweep", "--n-list", "2,4", "--samples", "3", "--svg", str(svg),
                     "--output", str(tmp_path / "t.csv"))
    assert code == EXIT_OK and svg.read_text().lstrip().startswith("<?xml")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "stochround", "bias-table", "--n", "20"],
                         capture_output=True, text=True, check=True)
    assert "0.3125" in res.stdout
