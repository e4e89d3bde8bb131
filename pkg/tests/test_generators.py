# tests/test_generators.py
"""
Funciones de tiempo, generadores polinomiales y push-forward, validación de
Re⟨h(z,t), z⟩ ≥ 0 y la familia Roper–Suffridge.
"""
import numpy as np
import pytest

from loewner.errores import GeneratorInvalid, ParameterOutOfRange, SchemaError
from loewner.generators import (
    OneVariableMap, PolynomialAutonomous, Pushforward, TimeFunction, admissibility,
    example_generator, generator_from_json, monomial_remark_generator, roper_suffridge_field,
    roper_suffridge_generator, validate,
)
from loewner.linalg_spectral import analyze
from loewner.muestreo import bola_aleatoria
from loewner.polyspace import HomPolyMap
from loewner.serializacion import dumps, loads


# ── funciones de tiempo ───────────────────────────────────────────────────────

def test_time_function_kinds():
    t = np.array([0.0, 1.0, 3.0, 4.0])
    np.testing.assert_allclose(TimeFunction.window(3.0)(t), [1, 1, 1, 0])
    np.testing.assert_allclose(TimeFunction.exp_decay(2.0, 0.5)(t), 0.5 * np.exp(-2 * t))
    np.testing.assert_allclose(TimeFunction.oscillation(1.0)(t), np.exp(1j * t))
    assert TimeFunction.constant(0.3)(5.0) == 0.3
    assert TimeFunction.window(3.0).breakpoints == (3.0,)
    assert TimeFunction.exp_decay(1.0).breakpoints == ()


def test_time_function_table_interpolates():
    a = TimeFunction.table([0.0, 1.0, 2.0], [0.0, 1.0, 1j])
    assert a(0.5) == pytest.approx(0.5)
    assert a(1.5) == pytest.approx(0.5 + 0.5j)
    assert a.bound == pytest.approx(1.0)
    assert a.breakpoints == (0.0, 1.0, 2.0)


def test_time_function_table_rejects_unsorted_times():
    with pytest.raises(ParameterOutOfRange):
        TimeFunction.table([0.0, 2.0, 1.0], [0, 0, 0])


def test_time_function_json_roundtrip_kind():
    a = TimeFunction.from_json({"kind": "exp_decay", "rate": 1.5, "amplitude": {"re": 0.5, "im": 0.5}})
    assert a.kind == "exp_decay"
    assert a(0.0) == pytest.approx(0.5 + 0.5j)
    with pytest.raises(SchemaError):
        TimeFunction.from_json({"kind": "sawtooth"})


def test_custom_time_function_is_not_serializable():
    a = TimeFunction.custom(lambda t: np.cos(t), bound=1.0)
    assert a(0.0) == pytest.approx(1.0)
    with pytest.raises(SchemaError):
        a.to_json()


# ── generador de ejemplo ──────────────────────────────────────────────────────

def test_example_generator_values():
    h = example_generator(2.5, TimeFunction.exp_decay(1.0))
    z = np.array([0.3, 0.4j])
    np.testing.assert_allclose(h(z, 1.0), [2.5 * 0.3 + np.exp(-1.0) * (0.4j) ** 2, 0.4j])
    assert not h.is_autonomous
    assert h.degrees() == [2]


@pytest.mark.parametrize("lam, a", [(1.5, 1.0), (2.5, 1.5), (2.0, TimeFunction.exp_decay(1.0, 2.0))])
def test_example_generator_rejects_out_of_range(lam, a):
    with pytest.raises(ParameterOutOfRange):
        example_generator(lam, a)


def test_example_generator_rejects_bare_callable():
    with pytest.raises(ParameterOutOfRange):
        example_generator(2.5, lambda t: np.exp(-t))


def test_validate_example_generator(h_ejemplo):
    informe = validate(h_ejemplo, samples_per_sphere=256, t_grid=(0.0, 1.0, 5.0))
    assert informe["passed"]
    assert informe["min_real_part"] >= 0
    assert informe["h0_error"] == 0.0
    assert informe["jacobian_error"] <= 1e-6


def test_validate_detects_violation():
    A = analyze(np.eye(2))
    h = PolynomialAutonomous(A, {2: HomPolyMap.monomial(2, (2, 0), 0, 3.0)})
    with pytest.raises(GeneratorInvalid) as exc:
        validate(h, samples_per_sphere=512)
    z, _ = exc.value.testigo
    assert np.real(np.vdot(z, h(z))) < 0

    informe = validate(h, samples_per_sphere=512, strict=False)
    assert informe["violation"] and not informe["passed"]


def test_validate_rejects_bad_radii(h_ejemplo):
    with pytest.raises(ParameterOutOfRange):
        validate(h_ejemplo, radii=(0.5, 1.0))


# ── familia monomial ──────────────────────────────────────────────────────────

def test_monomial_remark_generator():
    A = analyze(np.diag([3.0, 1.0]))
    familia = monomial_remark_generator(A, (0, 2), 0, 0.25)
    assert familia["defect"] == pytest.approx(1.0)
    assert familia["admissible_bound"] == pytest.approx(1.0)
    assert familia["admissible"]
    H = familia["generator"].H_k(2)
    assert H.coefficient((0, 2), 0) == pytest.approx(0.25)
    assert validate(familia["generator"], samples_per_sphere=256)["passed"]


def test_monomial_remark_generator_requires_leading_zeros():
    A = analyze(np.diag([3.0, 1.0]))
    with pytest.raises(ParameterOutOfRange):
        monomial_remark_generator(A, (1, 1), 0, 0.25)


# ── Roper–Suffridge ───────────────────────────────────────────────────────────

def test_admissibility_examples():
    koebe = admissibility(2.0, 1.5, 0.5)
    assert koebe["q_min"] == pytest.approx(1.0)
    assert koebe["admissible"] and koebe["parameter_ranges_ok"]

    # β > 1/2 fuera de las hipótesis, pero q(x) = (x − 1)² ≥ 0
    borde = admissibility(2.0, 0.0, 1.0)
    assert borde["q_min"] == pytest.approx(0.0)
    assert borde["admissible"]
    assert not borde["parameter_ranges_ok"]

    assert not admissibility(2.0, 0.0, 3.0)["admissible"]


def test_roper_suffridge_pushforward_matches_closed_form():
    h = roper_suffridge_generator("koebe", 1.5, 0.5, 2.0)
    Z = bola_aleatoria(2, 40, 0.9, 11)
    np.testing.assert_allclose(h(Z), roper_suffridge_field("koebe", 1.5, 0.5, 2.0, Z), rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(h(np.zeros(2)), [0.0, 0.0], atol=1e-15)


def test_roper_suffridge_generator_is_valid():
    h = roper_suffridge_generator("koebe", 1.5, 0.5, 2.0)
    assert h.is_autonomous and not h.is_polynomial
    assert validate(h, samples_per_sphere=256)["passed"]


def test_roper_suffridge_rejects_small_lambda():
    with pytest.raises(ParameterOutOfRange):
        roper_suffridge_generator("koebe", 0.5, 0.0, 0.5)


def test_custom_one_variable_map():
    f = OneVariableMap.custom(lambda z: z / (1 - z), lambda z: 1 / (1 - z) ** 2, lambda z: 2 / (1 - z) ** 3,
                              name="convexa")
    h = roper_suffridge_generator(f, 0.5, 0.0, 2.0)
    Z = bola_aleatoria(2, 10, 0.8, 3)
    np.testing.assert_allclose(h(Z), roper_suffridge_field("convex", 0.5, 0.0, 2.0, Z), rtol=1e-9, atol=1e-12)


# ── JSON ──────────────────────────────────────────────────────────────────────

def test_generator_from_json_forms():
    ejemplo = generator_from_json({"form": "example", "lambda": 2.5, "a": {"kind": "window", "T": 3}})
    assert ejemplo.breakpoints == (3.0,)

    autonomo = generator_from_json({
        "form": "polynomial_autonomous",
        "A": {"n": 2, "re": [[2, 0], [0, 1]]},
        "H": [{"n": 2, "k": 2, "terms": [{"m": [0, 2], "s": 1, "re": 0.25}]}],
    })
    assert autonomo.H_k(2).coefficient((0, 2), 0) == 0.25

    dependiente = generator_from_json({
        "form": "polynomial_time_dependent",
        "A": {"n": 2, "re": [[2.5, 0], [0, 1]]},
        "terms": [{"a": {"kind": "exp_decay", "rate": 1}, "Q": {"n": 2, "k": 2, "terms": [{"m": [0, 2], "s": 1, "re": 1}]}}],
    })
    z = np.array([0.1, 0.2])
    np.testing.assert_allclose(dependiente(z, 0.7), example_generator(2.5, TimeFunction.exp_decay(1.0))(z, 0.7))

    rs = generator_from_json({"form": "roper_suffridge", "f": "koebe", "alpha": 1.5, "beta": 0.5, "lambda": 2})
    assert rs.to_json()["alpha"] == 1.5


def test_generator_from_json_errors():
    with pytest.raises(SchemaError):
        generator_from_json({"form": "spline"})
    with pytest.raises(SchemaError):
        generator_from_json({"form": "example", "lambda": 1.0})
    with pytest.raises(SchemaError):
        generator_from_json({"form": "polynomial_autonomous", "A": {"n": 2, "re": [[1, 0]]}})


def test_generator_hash_is_stable():
    a = example_generator(2.5, TimeFunction.window(3.0))
    b = generator_from_json(loads(dumps(a)))
    assert a.hash() == b.hash()
    assert a.hash() != example_generator(2.5, TimeFunction.window(2.0)).hash()


def test_pushforward_without_description_has_no_hash():
    A = analyze(np.eye(2))
    h = Pushforward(A, lambda Z: Z, lambda Z: np.broadcast_to(np.eye(2), (np.atleast_2d(Z).shape[0], 2, 2)))
    np.testing.assert_allclose(h(np.array([0.2, 0.1])), [0.2, 0.1])
    assert h.hash() == "no-serializable"
