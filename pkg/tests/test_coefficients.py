# tests/test_coefficients.py
"""
Ecuaciones dF_k/dt = B_k F_k + N_k: N_k, solución polinomialmente acotada,
resonancias con y sin crecimiento, residuos y exportación.
"""
import numpy as np
import pandas as pd
import pytest

from loewner.coefficients import (
    bk_split, compute_Nk, residual_check, resonance_report, solve_chain_coefficients,
    solve_polybounded,
)
from loewner.errores import MissingLowerOrder, ProjectedInitialDatum, ResonantUnbounded
from loewner.generators import PolynomialAutonomous
from loewner.linalg_spectral import analyze, spectral_split
from loewner.polyspace import HomPolyMap

Z2E1 = ((0, 2), 0)


def _exacta_ejemplo(t, c0=0.0):
    return c0 * np.exp(-0.5 * t) + 2 * (np.exp(-0.5 * t) - np.exp(-t))


# ── N_k ───────────────────────────────────────────────────────────────────────

def test_compute_nk_degree_two_is_h2(h_ejemplo):
    N = compute_Nk({}, h_ejemplo, 2, t=1.0)
    assert N.coefficient(*Z2E1) == pytest.approx(np.exp(-1.0))


def test_compute_nk_composes_lower_orders():
    F2 = HomPolyMap.monomial(2, (0, 2), 0)
    H2 = HomPolyMap.monomial(2, (0, 2), 1)
    # DF₂·H₂ = (2z₂·z₂², 0)
    N3 = compute_Nk({2: F2}, {2: H2}, 3)
    assert N3.coefficient((0, 3), 0) == pytest.approx(2.0)
    assert np.count_nonzero(N3.vector) == 1


def test_compute_nk_requires_lower_orders(h_ejemplo):
    with pytest.raises(MissingLowerOrder) as exc:
        compute_Nk({}, h_ejemplo, 3)
    assert exc.value.faltantes == [2]


# ── solver genérico ───────────────────────────────────────────────────────────

def test_solve_polybounded_mixed_signs():
    L = np.diag([-1.0, 2.0]).astype(complex)
    N = lambda t: np.array([np.exp(-t), 1.0])
    sol = solve_polybounded(L, spectral_split(L), N)
    # x₁ = t e^{−t} (modo estable), x₂ = −1/2 (única solución acotada)
    np.testing.assert_allclose(sol.vector_at(1.0), [np.exp(-1.0), -0.5], atol=1e-9)
    np.testing.assert_allclose(sol.vector_at(4.3), [4.3 * np.exp(-4.3), -0.5], atol=1e-9)
    assert sol.bounded
    assert sol.horizon is not None and sol.horizon > 0
    assert residual_check(sol, N, [0.0, 0.5, 2.0, 7.0])["passed"]


def test_solve_polybounded_projects_initial_datum():
    L = np.diag([-1.0, 2.0]).astype(complex)
    with pytest.warns(ProjectedInitialDatum):
        sol = solve_polybounded(L, spectral_split(L), lambda t: np.zeros(2), F0_le=np.array([1.0, 1.0]),
                                N_constant=True)
    np.testing.assert_allclose(sol.F0_le, [1.0, 0.0])
    assert sol.vector_at(2.0)[0] == pytest.approx(np.exp(-2.0))


def test_solve_polybounded_sees_forcing_after_default_window():
    L = np.diag([-1.0, 2.0]).astype(complex)
    N = lambda t: np.array([0.0, 1.0 if t >= 25.0 else 0.0])
    sol = solve_polybounded(L, spectral_split(L), N, breakpoints=(25.0,))
    # x₂ = −1/2 para t ≥ 25 y −e^{2(t−25)}/2 antes
    assert sol.vector_at(30.0)[1] == pytest.approx(-0.5, abs=1e-8)
    assert sol.vector_at(24.0)[1] == pytest.approx(-0.5 * np.exp(-2.0), abs=1e-8)
    assert sol.horizon is not None and sol.horizon > 0
    assert sol.bound_poly(30.0) >= 0.5
    assert residual_check(sol, N, [22.0, 27.0, 30.0])["passed"]


# ── coeficientes de la cadena ─────────────────────────────────────────────────

def test_example_chain_coefficient(h_ejemplo):
    F = solve_chain_coefficients(h_ejemplo)
    assert list(F) == [2]
    F2 = F[2]
    for t in (0.0, 0.3, 1.0, 2.75, 9.0):
        assert F2.at(t).coefficient(*Z2E1) == pytest.approx(_exacta_ejemplo(t), abs=1e-9)
    # el resto de coeficientes es nulo
    v = F2.vector_at(1.0)
    assert np.abs(v).sum() == pytest.approx(abs(_exacta_ejemplo(1.0)), abs=1e-9)
    assert F2.bounded and not F2.constant
    assert F2.norm_at(1.0) == pytest.approx(_exacta_ejemplo(1.0), abs=1e-9)


def test_example_chain_coefficient_with_initial_datum(h_ejemplo):
    F0 = {2: HomPolyMap.monomial(2, (0, 2), 0, -2.0)}
    F2 = solve_chain_coefficients(h_ejemplo, F0)[2]
    for t in (0.0, 1.0, 5.0):
        assert F2.at(t).coefficient(*Z2E1) == pytest.approx(-2 * np.exp(-t), abs=1e-9)
    assert F2.evaluator(0.5).coefficient(*Z2E1) == F2.at(0.5).coefficient(*Z2E1)


def test_derivative_satisfies_coefficient_equation(h_ejemplo):
    F2 = solve_chain_coefficients(h_ejemplo)[2]
    t = 1.3
    esperada = -0.5 * _exacta_ejemplo(t) + np.exp(-t)
    assert F2.derivative_at(t).coefficient(*Z2E1) == pytest.approx(esperada, abs=1e-9)
    N = lambda u: compute_Nk({}, h_ejemplo, 2, u)
    assert residual_check(F2, N, [0.0, 1.0, 4.0])["passed"]


def test_autonomous_constant_solution(A_ejemplo):
    h = PolynomialAutonomous(A_ejemplo, {2: HomPolyMap.monomial(2, (0, 2), 0)})
    # c' = −c/2 + 1 es constante exactamente para c(0) = 2
    F2 = solve_chain_coefficients(h, {2: HomPolyMap.monomial(2, (0, 2), 0, 2.0)})[2]
    assert F2.constant
    assert F2.at(7.0).coefficient(*Z2E1) == pytest.approx(2.0)
    assert not solve_chain_coefficients(h)[2].constant


def test_resonant_autonomous_grows_linearly(A_resonante):
    h = PolynomialAutonomous(A_resonante, {2: HomPolyMap.monomial(2, (0, 2), 0, 0.5)})
    with pytest.warns(ResonantUnbounded):
        F2 = solve_chain_coefficients(h)[2]
    assert not F2.bounded
    assert F2.at(4.0).coefficient(*Z2E1) == pytest.approx(2.0, abs=1e-9)
    assert F2.bound_poly.coef[1] == pytest.approx(0.5, rel=1e-3)


def test_resonant_window_stays_bounded(h_ventana):
    F2 = solve_chain_coefficients(h_ventana)[2]
    assert F2.bounded
    for t in (1.0, 3.0, 6.0, 12.0):
        assert F2.at(t).coefficient(*Z2E1) == pytest.approx(min(t, 3.0), abs=1e-8)


def test_bk_split_uses_exact_zero_modes(A_resonante):
    split = bk_split(A_resonante, 2)
    assert int(split.mask_zero.sum()) == 1
    assert int(split.mask_plus.sum()) == 5


def test_three_dimensional_chain_degrees():
    A = analyze(np.diag([3.0, 2.0, 1.0]))
    h = PolynomialAutonomous(A, {2: HomPolyMap.monomial(3, (0, 1, 1), 1, 0.1)})
    F = solve_chain_coefficients(h)
    assert sorted(F) == [2, 3]


def test_resonance_report(A_resonante, A_ejemplo):
    resonante = resonance_report(A_resonante)
    assert resonante["passed"] and not resonante["nonresonant"]
    assert resonante["orders"][0]["exact"] == [{"m": [0, 2], "s": 1}]
    assert resonance_report(A_ejemplo)["nonresonant"]


def test_coefficient_export(h_ejemplo, tmp_path):
    F2 = solve_chain_coefficients(h_ejemplo)[2]
    ruta_json = F2.export(str(tmp_path / "F2.csv"), [0.0, 1.0, 2.0])
    df = pd.read_csv(tmp_path / "F2.csv")
    assert df["re_c02_1"].iloc[1] == pytest.approx(_exacta_ejemplo(1.0), abs=1e-12)
    assert ruta_json.endswith("F2.json")
