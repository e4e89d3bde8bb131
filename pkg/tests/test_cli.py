# tests/test_cli.py
"""Subcomandos de la CLI: informes JSON, ficheros de salida y códigos 0/1/2."""
import os

import orjson
import pandas as pd
import pytest
from click.testing import CliRunner

from loewner.cli import RunConfig, cli, leer_matriz, main, run
from loewner.errores import SchemaError

GENERADOR = '{"form": "example", "lambda": 2.5, "a": {"kind": "exp_decay", "rate": 1}}'
H_RESONANTE = '{"H": [{"n": 2, "k": 2, "terms": [{"m": [0, 2], "s": 1, "re": 0.5}]}]}'


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def puntos_csv(tmp_path):
    ruta = tmp_path / "puntos.csv"
    pd.DataFrame({"re_z1": [0.3, -0.1], "im_z1": [0.0, 0.2], "re_z2": [0.2, 0.4], "im_z2": [0.1, 0.0]}) \
        .to_csv(ruta, index=False)
    return str(ruta)


def _informe(resultado):
    return orjson.loads(resultado.stdout)


# ── entradas ──────────────────────────────────────────────────────────────────

def test_read_matrix_forms(tmp_path):
    assert leer_matriz("diag(2.5, 1)").shape == (2, 2)
    assert leer_matriz("diag(2+1i, 1)")[0, 0] == 2 + 1j
    ruta = tmp_path / "A.json"
    ruta.write_text('{"A": {"n": 2, "re": [[2, 0], [0, 1]]}}')
    assert leer_matriz(str(ruta))[1, 1] == 1
    with pytest.raises(SchemaError):
        leer_matriz("diag(1, 1, 1, 1, 1)")
    with pytest.raises(SchemaError):
        leer_matriz("diag(a, b)")


# ── códigos de salida ─────────────────────────────────────────────────────────

def test_analyze_ok(runner):
    resultado = runner.invoke(cli, ["analyze", "--A", "diag(2.5,1)"])
    assert resultado.exit_code == 0, resultado.output
    informe = _informe(resultado)
    assert informe["status"] == "ok" and informe["passed"]
    assert informe["n0"] == 2
    assert informe["m"] == pytest.approx(1.0)


def test_analyze_not_accretive_is_input_error(runner):
    resultado = runner.invoke(cli, ["analyze", "--A", "diag(1,-1)"])
    assert resultado.exit_code == 1


def test_dimension_cap(runner):
    assert runner.invoke(cli, ["analyze", "--A", "diag(1,1,1,1,1)"]).exit_code == 1


def test_main_maps_usage_errors_to_one():
    assert main(["analyze"]) == 1
    assert main(["no-such-command"]) == 1


def test_run_unknown_command():
    assert run(RunConfig("nada")) == 1


def test_resonance(runner):
    resultado = runner.invoke(cli, ["resonance", "--A", "diag(2,1)", "--kmax", "3"])
    assert resultado.exit_code == 0
    informe = _informe(resultado)
    assert informe["orders"][0]["exact"] == [{"m": [0, 2], "s": 1}]


def test_spirallike_resonant_check_fails(runner):
    resultado = runner.invoke(cli, ["spirallike", "solve", "--A", "diag(2,1)", "--h", H_RESONANTE, "--K", "2"])
    assert resultado.exit_code == 2
    informe = _informe(resultado)
    assert informe["verdict"] == "NoHolomorphicSolution"
    assert not informe["passed"]


def test_spirallike_solve_with_generator(runner):
    h = '{"form": "polynomial_autonomous", "A": {"n": 2, "re": [[3, 0], [0, 1]]}, ' \
        '"H": [{"n": 2, "k": 2, "terms": [{"m": [0, 2], "s": 1, "re": 0.25}]}]}'
    resultado = runner.invoke(cli, ["spirallike", "solve", "--h", h, "--K", "2"])
    assert resultado.exit_code == 0, resultado.output
    assert _informe(resultado)["verdict"] == "unique"


def test_spirallike_solve_needs_matrix(runner):
    assert runner.invoke(cli, ["spirallike", "solve", "--h", H_RESONANTE]).exit_code == 1


# ── ficheros ──────────────────────────────────────────────────────────────────

def test_evolve_writes_trajectories(runner, puntos_csv, tmp_path):
    carpeta = tmp_path / "evol"
    resultado = runner.invoke(cli, ["evolve", "--generator", GENERADOR, "--points", puntos_csv,
                                    "--t-end", "3", "--out", str(carpeta)])
    assert resultado.exit_code == 0, resultado.output
    assert (carpeta / "trajectory_1.csv").exists() and (carpeta / "trajectory_2.csv").exists()
    informe = orjson.loads((carpeta / "evolve.json").read_bytes())
    assert informe["validation_passed"]
    assert len(informe["trajectories"]) == 2


def test_coefficients_writes_tables(runner, tmp_path):
    carpeta = tmp_path / "coef"
    resultado = runner.invoke(cli, ["coefficients", "--generator", GENERADOR, "--t-grid", "0:4:9",
                                    "--out", str(carpeta)])
    assert resultado.exit_code == 0, resultado.output
    df = pd.read_csv(carpeta / "F2.csv")
    assert len(df) == 9
    informe = orjson.loads((carpeta / "coefficients.json").read_bytes())
    assert informe["orders"][0]["k"] == 2


def test_coefficients_rejects_bad_grid(runner):
    resultado = runner.invoke(cli, ["coefficients", "--generator", GENERADOR, "--t-grid", "0-4"])
    assert resultado.exit_code == 1


def test_chain_evaluate_report_and_values(runner, puntos_csv, tmp_path):
    coeffs = tmp_path / "coeffs.json"
    coeffs.write_text('{"F0_le": [{"n": 2, "k": 2, "terms": [{"m": [0, 2], "s": 1, "re": -2}]}]}')
    salida = tmp_path / "chain.json"
    resultado = runner.invoke(cli, ["chain", "evaluate", "--generator", GENERADOR, "--coeffs", str(coeffs),
                                    "--points", puntos_csv, "--out", str(salida)])
    assert resultado.exit_code == 0, resultado.output
    informe = orjson.loads(salida.read_bytes())
    assert informe["converged"]
    valores = pd.read_csv(informe["csv"])
    assert os.path.basename(informe["csv"]) == "chain_values.csv"
    # g(z, 0) = (z₁ − 2z₂², z₂)
    z1 = complex(0.3, 0.0)
    z2 = complex(0.2, 0.1)
    g1 = z1 - 2 * z2 ** 2
    assert valores["re_g1"].iloc[0] == pytest.approx(g1.real, abs=1e-6)
    assert valores["im_g1"].iloc[0] == pytest.approx(g1.imag, abs=1e-6)


def test_chain_growth(runner):
    resultado = runner.invoke(cli, ["chain", "growth", "--generator", GENERADOR, "--radii", "0.5,0.7,0.9",
                                    "--samples", "8"])
    assert resultado.exit_code == 0, resultado.output
    assert len(_informe(resultado)["rows"]) == 3


def test_chain_growth_rejects_bad_radii(runner):
    resultado = runner.invoke(cli, ["chain", "growth", "--generator", GENERADOR, "--radii", "a,b"])
    assert resultado.exit_code == 1


def test_witness(runner):
    resultado = runner.invoke(cli, ["spirallike", "witness", "--A", "diag(3,2,1)", "--M", "5"])
    assert resultado.exit_code == 0, resultado.output
    informe = _informe(resultado)
    assert informe["certificate"]["k0"] == 3
    assert informe["membership"]["outside"] == 0


def test_extend(runner):
    resultado = runner.invoke(cli, ["spirallike", "extend", "--alpha", "1.5", "--beta", "0.5",
                                    "--lambda", "2", "--K", "3"])
    assert resultado.exit_code == 0, resultado.output
    informe = _informe(resultado)
    assert informe["admissibility"]["q_min"] == pytest.approx(1.0)


def test_verify_polyspace(runner):
    resultado = runner.invoke(cli, ["verify", "--suite", "polyspace", "--rapido"])
    assert resultado.exit_code == 0, resultado.output
    informe = _informe(resultado)
    assert informe["suites"][0]["suite"] == "polyspace"
    assert informe["reduced_sizes"] is True


def test_verify_reads_fast_mode_from_environment(runner):
    resultado = runner.invoke(cli, ["verify", "--suite", "linalg"], env={"LOEWNER_RAPIDO": "1"})
    assert resultado.exit_code == 0, resultado.output
    (suite,) = _informe(resultado)["suites"]
    assert suite["checks"][0]["matrices"] == 6
