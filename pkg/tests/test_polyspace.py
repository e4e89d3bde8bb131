# tests/test_polyspace.py
"""
Espacio P^k(C^n): base de monomios, evaluación, Jacobianos, B_k y sus
autovalores ⟨m,λ⟩ − λ_s.
"""
import numpy as np
import pytest

from loewner.errores import DimensionMismatch, ParameterOutOfRange, SchemaError
from loewner.linalg_spectral import analyze
from loewner.polyspace import (
    HomPolyMap, basis_labels, bk_eigenbasis, bk_formula_eigenvalues, build_Bk, compose_jacobian,
    exp_identities_check, monomials, poly_norm, resonant_labels, space_dim,
)


def _aleatorio(rng, n, k):
    dim = space_dim(n, k)
    return HomPolyMap.from_vector(n, k, rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def test_monomial_order_and_dimension():
    assert monomials(2, 2) == ((2, 0), (1, 1), (0, 2))
    assert monomials(3, 1) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert space_dim(2, 2) == 6
    assert space_dim(3, 2) == 18
    assert basis_labels(2, 2)[:3] == [((2, 0), 1), ((2, 0), 2), ((1, 1), 1)]


def test_monomial_evaluation():
    Q = HomPolyMap.monomial(2, (0, 2), 0, 3.0)
    z = np.array([0.2 + 0.1j, 0.5 - 0.3j])
    np.testing.assert_allclose(Q(z), [3.0 * z[1] ** 2, 0.0])
    assert Q.coefficient((0, 2), 0) == 3.0
    assert poly_norm(Q) == pytest.approx(3.0)


def test_monomial_rejects_bad_component():
    with pytest.raises(DimensionMismatch):
        HomPolyMap.monomial(2, (1, 1), 2)


def test_batch_evaluation_matches_pointwise(rng):
    Q = _aleatorio(rng, 3, 3)
    Z = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    lote = Q(Z)
    for z, fila in zip(Z, lote):
        np.testing.assert_allclose(Q(z), fila, rtol=1e-13)


def test_jacobian_matches_finite_differences(rng):
    Q = _aleatorio(rng, 2, 3)
    z = np.array([0.3 - 0.2j, -0.1 + 0.4j])
    paso = 1e-6
    numerico = np.stack([(Q(z + paso * e) - Q(z - paso * e)) / (2 * paso) for e in np.eye(2)], axis=1)
    np.testing.assert_allclose(Q.jacobian(z), numerico, rtol=1e-7, atol=1e-9)


def test_jacobian_apply_is_k_times_polarization(rng):
    Q = _aleatorio(rng, 2, 2)
    z = np.array([0.3, 0.5j])
    # DQ(z)·z = k·Q(z) para Q homogéneo de grado k
    np.testing.assert_allclose(Q.jacobian_apply(z, z), 2 * Q(z), rtol=1e-12)


def test_compose_jacobian_matches_evaluation(rng):
    F = _aleatorio(rng, 2, 2)
    W = _aleatorio(rng, 2, 3)
    compuesto = compose_jacobian(F, W)
    assert compuesto.k == 4
    for z in rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2)):
        np.testing.assert_allclose(compuesto(z), F.jacobian(z) @ W(z), rtol=1e-11)


def test_build_bk_acts_as_lie_bracket(rng):
    A = analyze(np.array([[2.0, 1.0], [0.0, 1.0]]))
    Q = _aleatorio(rng, 2, 2)
    BQ = Q.apply_matrix(build_Bk(A, 2))
    z = np.array([0.4 + 0.1j, -0.2 + 0.3j])
    np.testing.assert_allclose(BQ(z), Q.jacobian(z) @ (A.entries @ z) - A.entries @ Q(z), rtol=1e-11)


def test_bk_eigenvalues_follow_multi_index_formula(rng):
    M = np.diag([2.0 + 0.5j, 1.0, 1.5]) + 0.1 * rng.standard_normal((3, 3))
    A = analyze(M)
    for k in (2, 3):
        calculados = np.linalg.eigvals(build_Bk(A, k))
        formula = bk_formula_eigenvalues(A.eigenvalues, k)
        distancia = np.abs(calculados[:, None] - formula[None, :]).min(axis=1)
        assert distancia.max() <= 1e-8


def test_build_bk_rejects_degree_below_two():
    A = analyze(np.diag([2.0, 1.0]))
    for k in (0, 1):
        with pytest.raises(ParameterOutOfRange):
            build_Bk(A, k)


def test_bk_eigenbasis_diagonalizes():
    A = analyze(np.array([[2.0, 1.0], [0.0, 1.0]]))
    valores, V = bk_eigenbasis(A, 2)
    B = build_Bk(A, 2)
    np.testing.assert_allclose(B @ V, V * valores[None, :], atol=1e-10)


def test_exp_identities_hold(rng):
    A = analyze(np.array([[2.0, 0.5j], [0.0, 1.0 + 1j]]))
    Q = _aleatorio(rng, 2, 3)
    informe = exp_identities_check(A, Q, np.array([0.3, -0.4j]), 0.7)
    assert informe["passed"], informe["residuals"]


def test_resonant_labels_two_dimensional():
    assert resonant_labels([2.0, 1.0], 2) == [((0, 2), 1)]
    assert resonant_labels([2.5, 1.0], 2) == []


def test_resonant_labels_three_dimensional():
    lam = [3.0, 2.0, 1.0]
    assert resonant_labels(lam, 2) == [((0, 1, 1), 1), ((0, 0, 2), 2)]
    assert resonant_labels(lam, 3) == [((0, 0, 3), 1)]


def test_real_part_resonances_only():
    lam = [2.0 + 1j, 1.0]
    assert resonant_labels(lam, 2) == []
    assert resonant_labels(lam, 2, solo_real=True) == [((0, 2), 1)]


def test_json_uses_one_based_components():
    Q = HomPolyMap.monomial(2, (0, 2), 0, 1.5 - 0.5j)
    datos = Q.to_json()
    assert datos["terms"] == [{"m": [0, 2], "s": 1, "re": 1.5, "im": -0.5}]
    assert HomPolyMap.from_json(datos).coefficient((0, 2), 0) == 1.5 - 0.5j


@pytest.mark.parametrize("termino", [
    {"m": [0, 2], "s": 3, "re": 1.0},
    {"m": [1, 2], "s": 1, "re": 1.0},
    {"m": [0, 2], "s": 1},
])
def test_from_json_rejects_bad_terms(termino):
    with pytest.raises(SchemaError):
        HomPolyMap.from_json({"n": 2, "k": 2, "terms": [termino]})
