# ==============================================================================
# verificacion.py
# Suites de propiedades detrás de `loewner verify`.
#
# Cada suite devuelve {"suite", "checks": [...], "passed"}; cada comprobación
# es {"name", "passed", ...medidas}. Un LoewnerError dentro de una
# comprobación la marca como fallida con el mensaje, nunca aborta la suite.
# Todo el muestreo deriva de la semilla recibida.
# ==============================================================================

from __future__ import annotations

import logging
import time
from typing import Any, Callable, Dict, List

import numpy as np

from .chains import (
    chain_jacobian_at_origin, chain_limit, check_growth_bound, check_subordination,
    coefficient_recovery_check,
)
from .coefficients import compute_Nk, residual_check, solve_chain_coefficients
from .config import tamanos_verify
from .errores import LoewnerError, NotResonant, SchemaError
from .generators import (
    PolynomialAutonomous, TimeFunction, example_generator, monomial_remark_generator,
    roper_suffridge_field, roper_suffridge_generator, validate,
)
from .linalg_spectral import OperatorA, analyze, exp_norm_certificates, spectral_split
from .muestreo import bola_aleatoria
from .polyspace import (
    HomPolyMap, bk_formula_eigenvalues, build_Bk, exp_identities_check, poly_norm, space_dim,
)
from .spirallike import (
    AffineSolutionSet, noncompactness_witness, roper_suffridge_extend, solve_spirallike,
    spirallike_membership, spirallike_residual,
)
from .transition import (
    check_schwarz, check_semigroup, check_transition_inequality, example_transition, integrate,
)

log = logging.getLogger(__name__)

Comprobacion = Dict[str, Any]


def _ejecutar(nombre: str, fn: Callable[[], Comprobacion]) -> Comprobacion:
    inicio = time.perf_counter()
    try:
        resultado = fn()
    except LoewnerError as e:
        log.warning(f"⚠️  verify/{nombre}: {type(e).__name__}: {e}")
        resultado = {"passed": False, "error": f"{type(e).__name__}: {e}"}
    resultado = {"name": nombre, **resultado}
    resultado["passed"] = bool(resultado["passed"])
    log.info(f"{'✅' if resultado['passed'] else '❌'} verify/{nombre} ({time.perf_counter() - inicio:.1f} s)")
    return resultado


def _suite(nombre: str, checks: List[Comprobacion]) -> Dict[str, Any]:
    return {"suite": nombre, "checks": checks, "passed": all(c["passed"] for c in checks)}


# ── instancias aleatorias ─────────────────────────────────────────────────────

def _A_aleatoria(rng: np.random.Generator, n: int) -> OperatorA:
    while True:
        D = np.diag(rng.uniform(1.0, 3.0, n) + 1j * rng.uniform(-1.0, 1.0, n))
        perturbacion = 0.1 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        try:
            A = analyze(D + perturbacion)
        except LoewnerError:
            continue
        if A.diagonalizable:
            return A


def _A_normal(rng: np.random.Generator, n: int) -> OperatorA:
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    lam = rng.uniform(0.5, 3.0, n) + 1j * rng.uniform(-2.0, 2.0, n)
    return analyze(Q @ np.diag(lam) @ Q.conj().T)


def _H_aleatorio(rng: np.random.Generator, n: int, k: int, escala: float) -> HomPolyMap:
    dim = space_dim(n, k)
    Q = HomPolyMap.from_vector(n, k, rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    return Q * (escala / poly_norm(Q))


def generador_aleatorio(rng: np.random.Generator, n: int = 2) -> PolynomialAutonomous:
    """Generador polinomial válido: ‖H(z)‖ ≤ m(A)/2 · ‖z‖² en la bola."""
    A = analyze(np.diag(rng.uniform(1.0, 3.0, n) + 1j * rng.uniform(-1.0, 1.0, n)))
    return PolynomialAutonomous(A, {2: _H_aleatorio(rng, n, 2, A.m / 2)}, nombre="aleatorio")


# ──────────────────────────────────────────────────────────────────────────────
# SUITES
# ──────────────────────────────────────────────────────────────────────────────

def suite_linalg(seed: int, rapido: bool = False) -> Dict[str, Any]:
    rng = np.random.default_rng(seed)
    tam = tamanos_verify(rapido)

    def formula_bk() -> Comprobacion:
        peor = 0.0
        for _ in range(tam["bk_matrices"]):
            A = _A_aleatoria(rng, int(rng.integers(2, 5)))
            for k in range(2, tam["bk_grado_max"] + 1):
                calculados = np.sort_complex(np.linalg.eigvals(build_Bk(A, k)))
                formula = np.sort_complex(bk_formula_eigenvalues(A.eigenvalues, k))
                # emparejado por distancia mínima: sort_complex no es estable frente a ruido
                distancias = np.abs(calculados[:, None] - formula[None, :]).min(axis=1)
                peor = max(peor, float(distancias.max()))
        return {"matrices": tam["bk_matrices"], "max_error": peor, "passed": peor <= 1e-8}

    def normales() -> Comprobacion:
        informes = [exp_norm_certificates(_A_normal(rng, int(rng.integers(2, 5))), np.linspace(0, 10, 11))
                    for _ in range(tam["normales"])]
        return {"instances": len(informes), "passed": all(i["passed"] for i in informes)}

    def proyecciones() -> Comprobacion:
        informe = spectral_split(build_Bk(_A_aleatoria(rng, 2), 2)).check_invariants()
        return {**{k: v for k, v in informe.items() if k != "status"}}

    return _suite("linalg", [_ejecutar("bk_eigenvalue_formula", formula_bk),
                             _ejecutar("normal_exponential_sharpness", normales),
                             _ejecutar("spectral_projections", proyecciones)])


def suite_polyspace(seed: int, rapido: bool = False) -> Dict[str, Any]:
    rng = np.random.default_rng(seed)
    tam = tamanos_verify(rapido)

    def identidades() -> Comprobacion:
        peor = 0.0
        for _ in range(tam["identidades"]):
            n = int(rng.integers(2, 4))
            A = _A_aleatoria(rng, n)
            Q = _H_aleatorio(rng, n, int(rng.integers(2, 4)), 1.0)
            z = bola_aleatoria(n, 1, 0.9, int(rng.integers(1 << 30)))[0]
            informe = exp_identities_check(A, Q, z, float(rng.uniform(0, 1)))
            peor = max(peor, max(informe["residuals"].values()))
        return {"cases": tam["identidades"], "max_residual": peor, "passed": peor <= 1e-7}

    return _suite("polyspace", [_ejecutar("exponential_identities", identidades)])


def suite_generators(seed: int, rapido: bool = False) -> Dict[str, Any]:
    def ejemplo() -> Comprobacion:
        informe = validate(example_generator(2.5, TimeFunction.exp_decay(1.0)), samples_per_sphere=256,
                           t_grid=(0.0, 1.0, 5.0), seed=seed, strict=False)
        return {"min_real_part": informe["min_real_part"], "passed": informe["passed"]}

    def roper_suffridge() -> Comprobacion:
        h = roper_suffridge_generator("koebe", 1.5, 0.5, 2.0)
        informe = validate(h, samples_per_sphere=256, seed=seed, strict=False)
        Z = bola_aleatoria(2, 50, 0.9, seed)
        diferencia = float(np.abs(h(Z) - roper_suffridge_field("koebe", 1.5, 0.5, 2.0, Z)).max())
        return {"min_real_part": informe["min_real_part"], "field_difference": diferencia,
                "passed": informe["passed"] and diferencia <= 1e-8}

    return _suite("generators", [_ejecutar("example_generator_valid", ejemplo),
                                 _ejecutar("roper_suffridge_pushforward", roper_suffridge)])


def suite_transition(seed: int, rapido: bool = False) -> Dict[str, Any]:
    rng = np.random.default_rng(seed)
    tam = tamanos_verify(rapido)
    tol = 1e-9

    def oraculo() -> Comprobacion:
        peor = 0.0
        tiempos = np.linspace(0.0, 10.0, 41)
        for lam in (2.0, 2.5):
            for a in (TimeFunction.window(3.0), TimeFunction.exp_decay(1.0)):
                h = example_generator(lam, a)
                for z in bola_aleatoria(2, tam["oraculo_puntos"], 0.9, int(rng.integers(1 << 30))):
                    traj = integrate(h, z, 0.0, 10.0, tol, times=tiempos)
                    exacta = example_transition(lam, a, z, 0.0, traj.times)
                    peor = max(peor, float(np.abs(traj.values - exacta).max()))
        return {"points": tam["oraculo_puntos"], "max_error": peor, "passed": peor <= 10 * tol}

    def desigualdad() -> Comprobacion:
        fallos = 0
        for _ in range(tam["desigualdad_generadores"]):
            h = generador_aleatorio(rng)
            for z in bola_aleatoria(2, tam["desigualdad_puntos"], 0.9, int(rng.integers(1 << 30))):
                traj = integrate(h, z, 0.0, 10.0, tol)
                if not (check_transition_inequality(traj, h.A)["passed"] and check_schwarz(traj, 1e-6)["passed"]):
                    fallos += 1
        total = tam["desigualdad_generadores"] * tam["desigualdad_puntos"]
        return {"trajectories": total, "failures": fallos, "passed": fallos == 0}

    def semigrupo() -> Comprobacion:
        h = example_generator(2.5, TimeFunction.window(3.0))
        informe = check_semigroup(h, np.array([0.3, 0.4]), 0.0, 2.0, 5.0, tol)
        return {"difference": informe["difference"], "passed": informe["passed"]}

    return _suite("transition", [_ejecutar("closed_form_oracle", oraculo),
                                 _ejecutar("transition_inequality_schwarz", desigualdad),
                                 _ejecutar("semigroup", semigrupo)])


def suite_coefficients(seed: int, rapido: bool = False) -> Dict[str, Any]:
    rejilla = np.linspace(0.0, 6.0, 13)

    def ejemplo() -> Comprobacion:
        h = example_generator(2.5, TimeFunction.exp_decay(1.0))
        F = solve_chain_coefficients(h)
        informe = residual_check(F[2], lambda t: compute_Nk(F, h, 2, t), rejilla)
        return {"max_relative_residual": informe["max_relative_residual"], "passed": informe["passed"]}

    def resonante() -> Comprobacion:
        A = analyze(np.diag([2.0, 1.0]))
        h = PolynomialAutonomous(A, {2: HomPolyMap.monomial(2, (0, 2), 0, 0.5)})
        F = solve_chain_coefficients(h)
        informe = residual_check(F[2], lambda t: compute_Nk(F, h, 2, t), rejilla)
        crece = F[2].norm_at(6.0) > F[2].norm_at(0.0)
        return {"max_relative_residual": informe["max_relative_residual"], "bounded": F[2].bounded,
                "passed": informe["passed"] and not F[2].bounded and crece}

    return _suite("coefficients", [_ejecutar("example_residual", ejemplo),
                                   _ejecutar("resonant_linear_growth", resonante)])


def suite_chains(seed: int, rapido: bool = False) -> Dict[str, Any]:
    rng = np.random.default_rng(seed)
    h = example_generator(2.5, TimeFunction.exp_decay(1.0))
    F0 = {2: HomPolyMap.monomial(2, (0, 2), 0, -2.0)}

    def ejemplo() -> Comprobacion:
        coeffs = solve_chain_coefficients(h, F0)
        Z = bola_aleatoria(2, 8, 0.9, seed)
        ev = chain_limit(h, coeffs, Z, 0.0, 1e-9)
        exacta = np.stack([Z[:, 0] - 2 * Z[:, 1] ** 2, Z[:, 1]], axis=1)
        error = float(np.abs(ev.values - exacta).max())
        return {"max_error": error, "T_used": ev.T_used, "passed": error <= 1e-6}

    def subordinacion() -> Comprobacion:
        peor, pasa = 0.0, True
        for g in (h, example_generator(2.0, TimeFunction.window(3.0))):
            coeffs = solve_chain_coefficients(g)
            for z in bola_aleatoria(2, 2, 0.8, int(rng.integers(1 << 30))):
                s = float(rng.uniform(0, 1))
                informe = check_subordination(g, coeffs, z, s, s + float(rng.uniform(0, 2)), 1e-8)
                peor = max(peor, informe["max_difference"])
                pasa = pasa and peor <= 1e-5
        return {"max_difference": peor, "passed": pasa}

    def derivada_origen() -> Comprobacion:
        coeffs = solve_chain_coefficients(h)
        errores = [chain_jacobian_at_origin(h, coeffs, s)["relative_error"] for s in (0.0, 1.0, 2.0)]
        return {"relative_errors": errores, "passed": max(errores) <= 1e-5}

    def recuperacion() -> Comprobacion:
        coeffs = solve_chain_coefficients(h, F0)
        informe = coefficient_recovery_check(h, coeffs, 0.0, nodes=16)
        return {"max_error": informe["max_error"], "passed": informe["passed"]}

    return _suite("chains", [_ejecutar("example_chain", ejemplo),
                             _ejecutar("subordination", subordinacion),
                             _ejecutar("jacobian_at_origin", derivada_origen),
                             _ejecutar("coefficient_recovery", recuperacion)])


def suite_spirallike(seed: int, rapido: bool = False) -> Dict[str, Any]:
    rng = np.random.default_rng(seed)

    def monomio() -> Comprobacion:
        A = analyze(np.diag([3.0, 1.0]))
        familia = monomial_remark_generator(A, (0, 2), 0, 0.25)
        solucion = solve_spirallike(familia["generator"], 4)
        # B_3 es singular en (0,3)e₁: se toma la solución particular
        f = solucion.particular if isinstance(solucion, AffineSolutionSet) else solucion
        informe = spirallike_residual(f, familia["generator"], A)
        coincide = float(np.abs(f.coeffs[2].coeffs - familia["map_term"].coeffs).max())
        return {"residual": max(r["residual"] for r in informe["rows"]), "coefficient_error": coincide,
                "passed": informe["exact"] and coincide <= 1e-12}

    def orden() -> Comprobacion:
        A = analyze(np.diag([1.0, np.sqrt(2.0)]))
        h = PolynomialAutonomous(A, {2: _H_aleatorio(rng, 2, 2, A.m / 2)})
        informe = spirallike_residual(solve_spirallike(h, 4), h, A)
        return {"ratios": [c["ratio"] for c in informe["ratios"]], "passed": informe["passed"]}

    def testigos() -> Comprobacion:
        A = analyze(np.diag([2.0, 1.0]))
        filas, pasa = [], True
        for M in (1.0, 10.0, 100.0):
            w = noncompactness_witness(A, M)
            pertenece = spirallike_membership(w.map, A, samples=16, seed=seed)
            ok = w.certificate["norm_ok"] and w.certificate["residual"] <= 1e-12 * M and pertenece["passed"]
            filas.append({"M": M, "norm": w.certificate["norm_F_k0"], "passed": ok})
            pasa = pasa and ok
        try:
            noncompactness_witness(analyze(np.eye(2)), 1.0)
            identidad = False
        except NotResonant:
            identidad = True
        return {"rows": filas, "identity_not_resonant": identidad, "passed": pasa and identidad}

    def crecimiento() -> Comprobacion:
        ext = roper_suffridge_extend("koebe", 1.5, 0.5, 2.0)
        informe = check_growth_bound(ext, ext.A, radii=(0.5, 0.7, 0.8, 0.9, 0.95), samples=128, seed=seed)
        objetivo = 2 * ext.A.k_plus / ext.A.m
        return {"exponent": informe["exponent"],
                "passed": objetivo - 0.3 <= informe["exponent"] <= objetivo + 0.1}

    return _suite("spirallike", [_ejecutar("monomial_roundtrip", monomio),
                                 _ejecutar("residual_order", orden),
                                 _ejecutar("noncompactness_witness", testigos),
                                 _ejecutar("koebe_growth_exponent", crecimiento)])


SUITES: Dict[str, Callable[[int, bool], Dict[str, Any]]] = {
    "linalg": suite_linalg,
    "polyspace": suite_polyspace,
    "generators": suite_generators,
    "transition": suite_transition,
    "coefficients": suite_coefficients,
    "chains": suite_chains,
    "spirallike": suite_spirallike,
}


def run_suites(nombre: str = "all", seed: int = 7, rapido: bool = False) -> List[Dict[str, Any]]:
    """Ejecuta una suite (o todas). `rapido` usa Config.TAMANOS_VERIFY_RAPIDO."""
    if nombre != "all" and nombre not in SUITES:
        raise SchemaError(f"suite desconocida '{nombre}' (disponibles: {', '.join(SUITES)})", campo="suite")
    elegidas = list(SUITES) if nombre == "all" else [nombre]
    if rapido:
        log.warning("⚠️  verify: tamaños reducidos (modo rápido)")
    return [SUITES[s](seed, rapido) for s in elegidas]
