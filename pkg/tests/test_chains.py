# tests/test_chains.py
"""
Límite de la cadena g(z,s), límite paramétrico, Dg(0,s), subordinación,
crecimiento, univalencia, recuperación de coeficientes y la condición
necesaria asintótica.
"""
import numpy as np
import pandas as pd
import pytest

from loewner.chains import (
    asymptotic_necessary_condition, chain_jacobian_at_origin, chain_limit, check_growth_bound,
    check_subordination, coefficient_recovery_check, growth_profile, parametric_limit, sphere_sup,
    taylor_coefficients, univalence_spot_check,
)
from loewner.coefficients import solve_chain_coefficients
from loewner.errores import NoConvergence, ParameterOutOfRange, PreconditionViolated
from loewner.generators import PolynomialAutonomous, roper_suffridge_generator
from loewner.linalg_spectral import analyze
from loewner.polyspace import HomPolyMap

PUNTOS = np.array([[0.3, 0.2j], [-0.4 + 0.1j, 0.5], [0.0, -0.6], [0.2, 0.0]])


@pytest.fixture(scope="module")
def F_ejemplo(h_ejemplo):
    return solve_chain_coefficients(h_ejemplo)


def _g_ejemplo(Z, s):
    """g(z,s) = e^{sA}(z + F₂(z,s)) con F₂ = 2(e^{−s/2} − e^{−s}) z₂² e₁."""
    c = 2 * (np.exp(-0.5 * s) - np.exp(-s))
    return np.stack([np.exp(2.5 * s) * (Z[:, 0] + c * Z[:, 1] ** 2), np.exp(s) * Z[:, 1]], axis=1)


# ── límite de la cadena ───────────────────────────────────────────────────────

def test_example_chain_is_identity_at_zero(h_ejemplo, F_ejemplo):
    ev = chain_limit(h_ejemplo, F_ejemplo, PUNTOS, s=0.0)
    assert ev.converged
    np.testing.assert_allclose(ev.values, PUNTOS, atol=1e-7)
    assert ev.tail_estimate <= 1e-8
    assert ev.theoretical_rate == pytest.approx(0.5)


def test_example_chain_at_positive_time(h_ejemplo, F_ejemplo):
    ev = chain_limit(h_ejemplo, F_ejemplo, PUNTOS, s=0.7)
    np.testing.assert_allclose(ev.values, _g_ejemplo(PUNTOS, 0.7), atol=1e-6)


def test_chain_with_initial_datum_matches_parametric_limit(h_ejemplo):
    F = solve_chain_coefficients(h_ejemplo, {2: HomPolyMap.monomial(2, (0, 2), 0, -2.0)})
    cadena = chain_limit(h_ejemplo, F, PUNTOS)
    parametrico = parametric_limit(h_ejemplo, PUNTOS, tol=1e-8)
    esperado = np.stack([PUNTOS[:, 0] - 2 * PUNTOS[:, 1] ** 2, PUNTOS[:, 1]], axis=1)
    np.testing.assert_allclose(cadena.values, esperado, atol=1e-7)
    np.testing.assert_allclose(parametrico.values, esperado, atol=1e-6)
    assert parametrico.parametric


def test_three_dimensional_chain_decay_is_consistent():
    A = analyze(np.diag([3.0, 2.0, 1.0]))
    h = PolynomialAutonomous(A, {2: HomPolyMap.monomial(3, (0, 1, 1), 1, 0.1)})
    ev = chain_limit(h, solve_chain_coefficients(h), np.array([[0.3, 0.2, -0.2j], [0.1j, -0.4, 0.3]]))
    # (n₀ + 1)m − k₊ = 4·1 − 3
    assert ev.theoretical_rate == pytest.approx(1.0)
    assert ev.decay_rate is not None
    assert ev.decay_rate >= ev.theoretical_rate - 0.1
    assert ev.decay_consistent is True
    assert ev.to_json()["decay_consistent"] is True


def test_roper_suffridge_chain_decay_is_consistent():
    h = roper_suffridge_generator("koebe", 1.5, 0.5, 2.0)
    ev = chain_limit(h, solve_chain_coefficients(h), PUNTOS[:2] * 0.5)
    assert ev.decay_rate is not None
    assert ev.decay_consistent is True


def test_parametric_limit_diverges_on_resonance(A_resonante):
    h = PolynomialAutonomous(A_resonante, {2: HomPolyMap.monomial(2, (0, 2), 0, 0.5)})
    with pytest.raises(NoConvergence) as exc:
        parametric_limit(h, [[0.1, 0.3]])
    assert exc.value.parcial is not None


def test_chain_requires_all_coefficients(h_ejemplo):
    with pytest.raises(PreconditionViolated):
        chain_limit(h_ejemplo, {}, PUNTOS)


@pytest.mark.parametrize("z, s", [([[0.99, 0.0]], 0.0), ([[0.1, 0.1]], -1.0), ([[0.1, 0.1, 0.1]], 0.0)])
def test_chain_rejects_bad_points(h_ejemplo, F_ejemplo, z, s):
    with pytest.raises(ParameterOutOfRange):
        chain_limit(h_ejemplo, F_ejemplo, z, s=s)


def test_chain_export(h_ejemplo, F_ejemplo, tmp_path):
    ev = chain_limit(h_ejemplo, F_ejemplo, PUNTOS)
    ev.export(str(tmp_path / "g.csv"))
    df = pd.read_csv(tmp_path / "g.csv")
    assert list(df.columns[:4]) == ["re_z1", "im_z1", "re_z2", "im_z2"]
    assert "re_g2" in df.columns and "tail_estimate" in df.columns
    assert len(df) == len(PUNTOS)
    assert (tmp_path / "g.json").exists()


# ── comprobaciones ────────────────────────────────────────────────────────────

def test_jacobian_at_origin(h_ejemplo, F_ejemplo, A_ejemplo):
    informe = chain_jacobian_at_origin(h_ejemplo, F_ejemplo, s=0.5)
    assert informe["passed"], informe["relative_error"]
    np.testing.assert_allclose(informe["jacobian"], np.diag(np.exp([1.25, 0.5])), rtol=1e-5, atol=1e-9)


def test_subordination(h_ejemplo, F_ejemplo):
    informe = check_subordination(h_ejemplo, F_ejemplo, PUNTOS[:2], 0.0, 1.5)
    assert informe["passed"], informe["max_difference"]


def test_subordination_rejects_reversed_times(h_ejemplo, F_ejemplo):
    with pytest.raises(ParameterOutOfRange):
        check_subordination(h_ejemplo, F_ejemplo, PUNTOS, 2.0, 1.0)


def test_growth_bound_on_chain_profile(h_ejemplo, F_ejemplo):
    perfil = growth_profile(h_ejemplo, F_ejemplo, radii=[0.5, 0.7, 0.9], samples=8)
    assert len(perfil) == 3
    informe = check_growth_bound(perfil)
    assert informe["passed"], informe
    assert [f["r"] for f in informe["rows"]] == pytest.approx([0.5, 0.7, 0.9])


def test_growth_bound_with_map(A_ejemplo):
    informe = check_growth_bound(lambda Z: Z, A_ejemplo, samples=32, radii=(0.5, 0.8, 0.9, 0.95))
    assert informe["passed"]
    assert informe["exponent"] < 1.0
    assert "sharp_bound" in informe


def test_growth_bound_with_map_needs_operator():
    with pytest.raises(ParameterOutOfRange):
        check_growth_bound(lambda Z: Z)


def test_univalence_of_chain(h_ejemplo, F_ejemplo, rng):
    Z = rng.uniform(-0.4, 0.4, (40, 2)) + 1j * rng.uniform(-0.4, 0.4, (40, 2))
    ev = chain_limit(h_ejemplo, F_ejemplo, Z)
    informe = univalence_spot_check(ev, jacobian_samples=5)
    assert informe["passed"], informe
    assert informe["min_abs_jacobian_det"] > 0.5


def test_univalence_detects_collision():
    Z = np.array([[0.1, 0.0], [-0.1, 0.0], [0.0, 0.2]])
    G = np.array([[0.01, 0.0], [0.01, 0.0], [0.0, 0.2]])
    informe = univalence_spot_check(Z, G)
    assert informe["min_ratio"] == 0.0
    assert not informe["passed"]


@pytest.mark.slow
def test_coefficient_recovery(h_ejemplo, F_ejemplo):
    informe = coefficient_recovery_check(h_ejemplo, F_ejemplo, s=0.5, nodes=16)
    assert informe["passed"], informe["rows"]


# ── condición necesaria asintótica ────────────────────────────────────────────

def _monomio_z2z2_e1(n, c):
    return HomPolyMap.monomial(n, (0, 2), 0, c)


def test_asymptotic_condition_cancels():
    A = analyze(np.diag([3.0, 1.0]))
    h = PolynomialAutonomous(A, {2: _monomio_z2z2_e1(2, 0.5)})
    T = [2.0, 4.0, 8.0, 16.0]
    # μ = λ₂ + λ₂ − λ₁ = −1; f = c anula el integrando
    informe = asymptotic_necessary_condition(h, _monomio_z2z2_e1(2, 0.5), 1, 1, 0, T)
    assert informe["mu"] == pytest.approx(-1.0)
    assert informe["passed"] and informe["limit_zero"]

    sin_f = asymptotic_necessary_condition(h, None, 1, 1, 0, T)
    assert not sin_f["cauchy"] and not sin_f["passed"]


def test_asymptotic_condition_purely_imaginary_mu():
    A = analyze(np.diag([2.0 + 2.0j, 1.0]))
    h = PolynomialAutonomous(A, {2: _monomio_z2z2_e1(2, 0.5)})
    T = np.linspace(1.0, 20.0, 12)
    informe = asymptotic_necessary_condition(h, _monomio_z2z2_e1(2, -0.25j), 1, 1, 0, T)
    assert informe["mu"] == pytest.approx(-2.0j)
    assert informe["passed"]
    assert not asymptotic_necessary_condition(h, None, 1, 1, 0, T)["passed"]


def test_asymptotic_condition_preconditions(A_ejemplo):
    h = PolynomialAutonomous(A_ejemplo, {2: _monomio_z2z2_e1(2, 0.5)})
    with pytest.raises(PreconditionViolated):
        asymptotic_necessary_condition(h, None, 0, 0, 1, [1.0, 2.0])        # Re μ > 0
    with pytest.raises(PreconditionViolated):
        asymptotic_necessary_condition(h, None, 1, 1, 2, [1.0, 2.0])        # índice fuera de rango
    with pytest.raises(PreconditionViolated):
        asymptotic_necessary_condition(h, None, 1, 1, 0, [1.0])
    with pytest.raises(PreconditionViolated):
        asymptotic_necessary_condition(roper_suffridge_generator("koebe", 1.5, 0.5, 2.0),
                                       None, 1, 1, 0, [1.0, 2.0])


# ── herramientas de muestreo ──────────────────────────────────────────────────

def _cubica(Z):
    Z = np.atleast_2d(Z)
    z1, z2 = Z[:, 0], Z[:, 1]
    return np.stack([z1 + 0.5 * z2 ** 2 + 0.1 * z1 * z2 ** 2, z2 - z1 * z2], axis=1)


def test_taylor_coefficients_of_polynomial_map():
    partes = taylor_coefficients(_cubica, 2, 3)
    np.testing.assert_allclose(partes[1].coeffs, np.eye(2), atol=1e-12)
    assert partes[2].coefficient((0, 2), 0) == pytest.approx(0.5, abs=1e-12)
    assert partes[2].coefficient((1, 1), 1) == pytest.approx(-1.0, abs=1e-12)
    assert partes[3].coefficient((1, 2), 0) == pytest.approx(0.1, abs=1e-12)
    assert abs(partes[3].coefficient((3, 0), 0)) <= 1e-12


def test_sphere_sup_of_linear_map():
    D = np.diag([2.0, 1.0])
    lineal = lambda Z: np.atleast_2d(Z) @ D.T
    refinado = sphere_sup(lineal, 2, 0.5, samples=64)
    assert refinado["sup"] == pytest.approx(1.0, rel=1e-6)
    assert abs(refinado["argmax"][1]) <= 1e-3
    crudo = sphere_sup(lineal, 2, 0.5, samples=64, refine=False)
    assert crudo["sup"] <= refinado["sup"] + 1e-12
