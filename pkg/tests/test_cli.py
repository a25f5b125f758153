"""Command-line surface: grammar, formats, exit codes, determinism."""
import json
import re

import pytest

from anharmonic.cli import run


def _capture(capsys, argv):
    code = run(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_energy_happy_path(capsys):
    code, out, err = _capture(
        capsys, ["energy", "--lambda", "1", "--digits", "8", "--omega0", "auto"]
    )
    assert code == 0
    assert "0.80377065" in out
    assert err == ""


def test_negative_coupling_is_an_argument_error(capsys):
    code, out, err = _capture(capsys, ["energy", "--lambda", "-1"])
    assert code == 2
    assert "Dyson" in err
    assert out == ""


def test_unknown_flag_prints_usage(capsys):
    code, out, err = _capture(capsys, ["energy", "--lambda", "1", "--frobnicate"])
    assert code == 2
    assert "usage" in err.lower()


def test_unknown_subcommand(capsys):
    code, out, err = _capture(capsys, ["eigenvalues"])
    assert code == 2


def test_levels_csv_matches_published_row(capsys):
    code, out, err = _capture(
        capsys,
        ["levels", "--lambda", "1", "--count", "7", "--digits", "8",
         "--format", "csv"],
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "E0,E1,E2,E3,E4,E5,E6"
    assert lines[1].split(",") == [
        "0.80377065",
        "2.73789227",
        "5.17929169",
        "7.94240398",
        "10.96358309",
        "14.20313910",
        "17.63404912",
    ]


def test_byte_determinism(capsys):
    argv = ["wavefunction", "--lambda", "2", "--level", "0",
            "--x", "-1:1:0.25", "--format", "json"]
    code1, out1, _ = _capture(capsys, argv)
    code2, out2, _ = _capture(capsys, list(argv))
    assert code1 == code2 == 0
    assert out1 == out2


def test_csv_and_json_carry_identical_digits(capsys):
    base = ["energy", "--lambda", "5", "--digits", "8"]
    code, csv_out, _ = _capture(capsys, base + ["--format", "csv"])
    assert code == 0
    header, row = csv_out.strip().splitlines()
    csv_fields = dict(zip(header.split(","), row.split(",")))
    code, json_out, _ = _capture(capsys, base + ["--format", "json"])
    assert code == 0
    raw_energy = re.search(r'"energy": ("?[^،",\s]+"?)', json_out).group(1)
    assert raw_energy.strip('"') == csv_fields["energy"]
    raw_omega0 = re.search(r'"omega0": ("?[^",\s]+"?)', json_out).group(1)
    assert raw_omega0.strip('"') == csv_fields["omega0"]


def test_json_quotes_beyond_double_precision(capsys):
    code, out, _ = _capture(
        capsys,
        ["energy", "--lambda", "0.25", "--omega0", "3.7", "--digits", "20",
         "--format", "json"],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["energy"] == "0.62092702982574866086"
    assert '"energy": "0.62092702982574866086"' in out


def test_convergence_failure_exit_code(capsys):
    code, out, err = _capture(
        capsys,
        ["energy", "--lambda", "1", "--omega0", "1", "--n-max", "10"],
    )
    assert code == 1
    assert "not stable" in err
    assert out == ""


def test_output_file_writes_same_bytes(capsys, tmp_path):
    argv = ["converge", "--lambda", "0.7", "--orders", "5..15:10",
            "--format", "csv"]
    code, out, _ = _capture(capsys, argv)
    assert code == 0
    target = tmp_path / "table.csv"
    code, silent, _ = _capture(capsys, argv + ["--output", str(target)])
    assert code == 0
    assert silent == ""
    assert target.read_text() == out
    assert out.splitlines()[0] == "N,E0"
    assert out.splitlines()[1] == "5,0.74425930"
    assert out.splitlines()[2] == "15,0.74390350"


def test_converge_rejects_policy_words(capsys):
    code, out, err = _capture(
        capsys,
        ["converge", "--lambda", "1", "--orders", "1..5", "--omega0", "auto"],
    )
    assert code == 2


def test_bad_orders_and_grid_specs(capsys):
    code, _, _ = _capture(capsys, ["converge", "--lambda", "1",
                                   "--orders", "7..3"])
    assert code == 2
    code, _, _ = _capture(capsys, ["converge", "--lambda", "1",
                                   "--orders", "five"])
    assert code == 2
    code, _, _ = _capture(capsys, ["wavefunction", "--lambda", "1",
                                   "--level", "0", "--x", "2:1:0.5"])
    assert code == 2
    code, _, _ = _capture(capsys, ["wavefunction", "--lambda", "1",
                                   "--level", "0", "--x", "0:1:0"])
    assert code == 2


def test_thread_cap_environment_variable(capsys, monkeypatch):
    monkeypatch.setenv("ANHARM_THREADS", "zzz")
    code, _, err = _capture(capsys, ["omega0", "predict", "--lambda", "1"])
    assert code == 2
    assert "ANHARM_THREADS" in err
    monkeypatch.setenv("ANHARM_THREADS", "-2")
    code, _, _ = _capture(capsys, ["omega0", "predict", "--lambda", "1"])
    assert code == 2
    monkeypatch.setenv("ANHARM_THREADS", "4")
    code, out, _ = _capture(capsys, ["omega0", "predict", "--lambda", "1"])
    assert code == 0
    assert "3.47542" in out


def test_omega0_predict_text(capsys):
    code, out, _ = _capture(capsys, ["omega0", "predict", "--lambda", "1"])
    assert code == 0
    assert "3.47542" in out


def test_omega0_optimize_reports_energy_bound(capsys):
    code, out, _ = _capture(
        capsys,
        ["omega0", "optimize", "--lambda", "100", "--order", "6",
         "--format", "json"],
    )
    assert code == 0
    payload = json.loads(out)
    assert float(payload["energy"]) <= 3.13140
    assert float(payload["omega0"]) > 1


def test_omega0_fit_roundtrip(capsys, tmp_path):
    source = tmp_path / "points.csv"
    rows = ["lambda,omega0"]
    for k in range(6):
        lam = 2.0 ** k
        import math

        rows.append(f"{lam},{1.0 + 2.0 * math.log(lam)}")
    source.write_text("\n".join(rows) + "\n")
    code, out, _ = _capture(
        capsys, ["omega0", "fit", "--input", str(source), "--format", "json"]
    )
    assert code == 0
    payload = json.loads(out)
    assert abs(float(payload["a"]) - 1.0) < 1e-6
    assert abs(float(payload["b"]) - 2.0) < 1e-6
    assert abs(float(payload["c"])) < 1e-6
    assert float(payload["sse"]) < 1e-12


def test_omega0_fit_missing_file(capsys, tmp_path):
    code, _, err = _capture(
        capsys, ["omega0", "fit", "--input", str(tmp_path / "absent.csv")]
    )
    assert code == 2


def test_potential_csv(capsys):
    code, out, _ = _capture(
        capsys,
        ["potential", "--lambda", "100", "--omega0", "16", "--x", "0:1:1",
         "--format", "csv"],
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "x,harmonic,perturbation"
    assert lines[1] == "0,0.00000000,0.00000000"
    assert lines[2] == "1,128.00000000,100.00000000"


def test_wavefunction_negative_grid_bound(capsys):
    code, out, _ = _capture(
        capsys,
        ["wavefunction", "--lambda", "1", "--level", "0", "--x", "-1:1:0.5",
         "--format", "csv"],
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "x,psi"
    xs = [line.split(",")[0] for line in lines[1:]]
    assert xs == ["-1.0", "-0.5", "0.0", "0.5", "1.0"]
    values = {x: v for x, v in (line.split(",") for line in lines[1:])}
    assert values["-1.0"] == values["1.0"]  # even ground state


def test_wavefunction_requires_level(capsys):
    code, _, err = _capture(capsys, ["wavefunction", "--lambda", "1"])
    assert code == 2
    assert "--level" in err
