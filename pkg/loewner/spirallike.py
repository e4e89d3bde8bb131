# ==============================================================================
# spirallike.py
# Teoría autónoma: Df(z)h(z) = Af(z).
#
#   solve_spirallike       : recursión B_k F_k + N_k = 0, k = 2..K
#   spirallike_residual    : ‖Df·h − Af‖ y su decaimiento de orden K+1
#   spirallike_membership  : f(w) = e^{−tA}f(z) por Newton amortiguado
#   roper_suffridge_extend : Φ_{α,β}(f) con sus coeficientes de Taylor
#   noncompactness_witness : mapas de norma arbitraria para A resonante
#
# Los núcleos de B_k se leen en la autobase exacta de bk_eigenbasis; entre
# varios vectores del núcleo se elige el primero en el orden de la base
# (lexicográfico descendente en m, luego s).
# ==============================================================================

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .coefficients import compute_Nk
from .config import Config, hilos_maximos
from .errores import (
    BranchFailure, DimensionMismatch, GeneratorInvalid, NewtonDiverged, NoHolomorphicSolution,
    NotDiagonalizable, NotResonant, ParameterOutOfRange, Resonant,
)
from .generators import (
    GeneratorSpec, PolynomialAutonomous, RoperSuffridgeMap, admissibility,
    roper_suffridge_generator, validate,
)
from .linalg_spectral import OperatorA, matrix_exp
from .muestreo import bola_aleatoria, esfera_sobol, evaluar_lote, taylor_homogeneos
from .polyspace import HomPolyMap, basis_labels, bk_eigenbasis, poly_norm, resonant_labels
from .serializacion import exigir

log = logging.getLogger(__name__)

Etiqueta = Tuple[Tuple[int, ...], int]


# ──────────────────────────────────────────────────────────────────────────────
# TRUNCATED MAP
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(eq=False)
class TruncatedMap:
    """f(z) = z + Σ_{k=2}^{K} F_k(z^k), normalizada con F₁ = identidad."""
    n:          int
    K:          int
    coeffs:     Dict[int, HomPolyMap]
    provenance: str = "solver"
    meta:       Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        identidad = HomPolyMap.identity(self.n)
        F1 = self.coeffs.get(1, identidad)
        if np.abs(F1.coeffs - identidad.coeffs).max() > 1e-8:
            raise ParameterOutOfRange("F₁ debe ser la identidad")
        completos = {1: identidad}
        for k in range(2, self.K + 1):
            Q = self.coeffs.get(k, HomPolyMap.zeros(self.n, k))
            if (Q.n, Q.k) != (self.n, k):
                raise DimensionMismatch(f"F_{k} fuera de P^{k}(C^{self.n})")
            completos[k] = Q
        self.coeffs = completos

    def __call__(self, z: Any) -> np.ndarray:
        Z = np.asarray(z, dtype=complex)
        Zb = np.atleast_2d(Z)
        salida = Zb.copy()
        for k in range(2, self.K + 1):
            salida = salida + self.coeffs[k].evaluate(Zb)
        return salida[0] if Z.ndim == 1 else salida

    def jacobian(self, z: Any) -> np.ndarray:
        Z = np.asarray(z, dtype=complex)
        Zb = np.atleast_2d(Z)
        J = np.broadcast_to(np.eye(self.n, dtype=complex), (Zb.shape[0], self.n, self.n)).copy()
        for k in range(2, self.K + 1):
            if not self.coeffs[k].is_zero():
                J = J + self.coeffs[k].jacobian(Zb)
        return J[0] if Z.ndim == 1 else J

    def norm(self, k: int) -> float:
        return poly_norm(self.coeffs[k])

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "K": self.K,
            "provenance": self.provenance,
            "coeffs": [self.coeffs[k].to_json() for k in range(2, self.K + 1)],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, datos: Any, campo: str = "map") -> "TruncatedMap":
        n = exigir(datos, "n", int, campo)
        K = exigir(datos, "K", int, campo)
        coeffs = {}
        for i, q in enumerate(datos.get("coeffs", [])):
            Q = HomPolyMap.from_json(q, f"{campo}.coeffs[{i}]")
            coeffs[Q.k] = coeffs[Q.k] + Q if Q.k in coeffs else Q
        return cls(n, K, coeffs, provenance=datos.get("provenance", "json"))


@dataclass(eq=False)
class AffineSolutionSet:
    """Soluciones de un problema resonante resoluble: particular + span de los núcleos."""
    particular: TruncatedMap
    kernels:    Dict[int, List[HomPolyMap]]
    witnesses:  Dict[int, List[Etiqueta]]

    def member(self, shifts: Dict[int, Sequence[complex]]) -> TruncatedMap:
        """
        Elemento con F_k = particular_k + Σ c_i κ_i para los k dados.

        Los órdenes superiores de la solución particular no se recalculan;
        solo es solución exacta si el desplazamiento no cambia N_j, j > k.
        """
        coeffs = dict(self.particular.coeffs)
        for k, c in shifts.items():
            for ci, kappa in zip(c, self.kernels[k]):
                coeffs[k] = coeffs[k] + kappa * complex(ci)
        return TruncatedMap(self.particular.n, self.particular.K, coeffs, provenance="affine_member")

    def to_json(self) -> Dict[str, Any]:
        return {
            "particular": self.particular.to_json(),
            "kernels": {str(k): [Q.to_json() for Q in v] for k, v in self.kernels.items()},
            "witnesses": {str(k): [{"m": list(m), "s": s} for m, s in v] for k, v in self.witnesses.items()},
        }


# ──────────────────────────────────────────────────────────────────────────────
# SOLVER
# ──────────────────────────────────────────────────────────────────────────────

def _resolver_orden(A: OperatorA, k: int, N: HomPolyMap) -> Tuple[HomPolyMap, List[HomPolyMap], List[Etiqueta]]:
    """
    Solución de B_k F + N = 0 en la autobase de B_k: los modos no nulos se
    dividen, los nulos quedan a 0. Devuelve (F, vectores del núcleo, etiquetas).
    """
    if not A.diagonalizable:
        raise NotDiagonalizable(A.cond)
    valores, V = bk_eigenbasis(A, k)
    c = np.linalg.solve(V, -N.vector)
    nulos = np.abs(valores) <= Config.TOL_RESONANCIA
    etiquetas = [basis_labels(A.n, k)[i] for i in np.flatnonzero(nulos)]
    if nulos.any():
        residuo = float(np.abs(c[nulos]).max())
        if residuo > Config.TOL_RESONANCIA * (1.0 + float(np.abs(c).max())):
            log.error(f"❌ spirallike: N_{k} fuera del rango de B_{k} (residuo {residuo:.3g})")
            raise NoHolomorphicSolution(k, etiquetas, residuo)
    coordenadas = np.where(nulos, 0, c / np.where(nulos, 1, valores))
    F = HomPolyMap.from_vector(A.n, k, V @ coordenadas)
    nucleo = []
    for j in np.flatnonzero(nulos):
        kappa = HomPolyMap.from_vector(A.n, k, V[:, j])
        nucleo.append(kappa * (1.0 / poly_norm(kappa)))
    return F, nucleo, etiquetas


def _polinomial(h: GeneratorSpec, K: int) -> GeneratorSpec:
    if not h.is_autonomous:
        raise GeneratorInvalid(f"{h.nombre}: la ecuación espiral necesita un generador autónomo")
    if h.is_polynomial:
        return h
    H = {k: Q for k, Q in taylor_homogeneos(h, h.n, K).items() if k >= 2}
    log.info(f"spirallike: {h.nombre} sustituido por su Taylor de grado {K}")
    return PolynomialAutonomous(h.A, H, nombre=f"taylor({h.nombre}, K={K})")


def solve_spirallike(h: GeneratorSpec, K: int, affine: bool = True) -> Union[TruncatedMap, AffineSolutionSet]:
    """
    Solución truncada de Df(z)h(z) = Af(z) hasta grado K.

    Con algún B_k singular: si affine=False lanza Resonant; si no, devuelve
    AffineSolutionSet cuando cada N_k está en el rango de B_k y lanza
    NoHolomorphicSolution en caso contrario.
    """
    if K < 1:
        raise ParameterOutOfRange(f"K = {K} < 1")
    h = _polinomial(h, K)
    A = h.A
    F: Dict[int, HomPolyMap] = {}
    nucleos: Dict[int, List[HomPolyMap]] = {}
    testigos: Dict[int, List[Etiqueta]] = {}
    for k in range(2, K + 1):
        resonancias = resonant_labels(A.eigenvalues, k)
        if resonancias and not affine:
            raise Resonant(k, resonancias)
        N = compute_Nk(F, h, k, n=A.n)
        F[k], nucleo, etiquetas = _resolver_orden(A, k, N)
        if nucleo:
            nucleos[k], testigos[k] = nucleo, etiquetas
            log.warning(f"⚠️  solve_spirallike: B_{k} singular, resonancias {etiquetas}")

    mapa = TruncatedMap(A.n, K, F, provenance="solver", meta={"generator": h.nombre})
    log.info(f"✅ solve_spirallike: K={K}, órdenes resonantes {sorted(nucleos)}")
    if nucleos:
        return AffineSolutionSet(mapa, nucleos, testigos)
    return mapa


# ──────────────────────────────────────────────────────────────────────────────
# COMPROBACIONES
# ──────────────────────────────────────────────────────────────────────────────

def _jacobiano(f: Any, Z: np.ndarray, paso: float = Config.PASO_DIF_FINITA) -> np.ndarray:
    if hasattr(f, "jacobian"):
        return np.asarray(f.jacobian(Z), dtype=complex).reshape(Z.shape[0], Z.shape[1], Z.shape[1])
    n = Z.shape[1]
    desplazados = np.concatenate([Z[:, None, :] + paso * np.eye(n)[None], Z[:, None, :] - paso * np.eye(n)[None]], axis=1)
    imagen = evaluar_lote(f, desplazados.reshape(-1, n)).reshape(Z.shape[0], 2 * n, n)
    return np.transpose((imagen[:, :n] - imagen[:, n:]) / (2 * paso), (0, 2, 1))


def spirallike_residual(f: Any, h: GeneratorSpec, A: Optional[OperatorA] = None,
                        radii: Sequence[float] = (0.2, 0.1), samples: int = 64,
                        seed: int = Config.SEMILLA_DEFECTO, K: Optional[int] = None) -> Dict[str, Any]:
    """
    max ‖Df(z)h(z) − Af(z)‖ sobre ‖z‖ = r. Para cada par (r, r/2) de `radii`
    el cociente residuo(r/2)/residuo(r) no debe superar 4·2^{−K}; un residuo que
    empieza en grado mayor que K + 2 cae más deprisa y también pasa.
    """
    A = A or h.A
    K = K if K is not None else getattr(f, "K", None)
    filas = []
    for r in radii:
        Z = esfera_sobol(h.n, float(r), samples, seed)
        izq = np.einsum("nij,nj->ni", _jacobiano(f, Z), np.atleast_2d(h(Z)))
        der = evaluar_lote(f, Z) @ A.entries.T
        filas.append({"r": float(r), "residual": float(np.linalg.norm(izq - der, axis=1).max())})

    exacta = all(fila["residual"] <= 1e-12 for fila in filas)
    cocientes = []
    por_radio = {fila["r"]: fila["residual"] for fila in filas}
    for r, res in por_radio.items():
        mitad = next((q for q in por_radio if abs(q - r / 2) <= 1e-12), None)
        if mitad is not None and res > 1e-12:
            cocientes.append({"r": r, "ratio": por_radio[mitad] / res})

    pasa = exacta
    if not exacta and K is not None and cocientes:
        pasa = all(c["ratio"] <= 4 * 2.0 ** (-K) for c in cocientes)
    return {"status": "ok", "K": K, "rows": filas, "ratios": cocientes, "exact": exacta,
            "expected_ratio": 2.0 ** (-(K + 1)) if K is not None else None,
            "ratio_bound": 4 * 2.0 ** (-K) if K is not None else None, "passed": bool(pasa)}


def _newton(f: Any, objetivo: np.ndarray, w0: np.ndarray, tol: float) -> Tuple[np.ndarray, float, int]:
    w = w0.copy()
    valor = evaluar_lote(f, w[None, :])[0] - objetivo
    residuo = float(np.linalg.norm(valor))
    for iteracion in range(Config.NEWTON_MAX_ITER):
        if residuo <= tol:
            return w, residuo, iteracion
        J = _jacobiano(f, w[None, :])[0]
        try:
            paso = np.linalg.solve(J, valor)
        except np.linalg.LinAlgError as e:
            raise NewtonDiverged(f"Df singular en w = {w}") from e
        lam = 1.0
        while lam > 1e-4:
            candidato = w - lam * paso
            nuevo = evaluar_lote(f, candidato[None, :])[0] - objetivo
            norma = float(np.linalg.norm(nuevo))
            if np.isfinite(norma) and norma < residuo:
                w, valor, residuo = candidato, nuevo, norma
                break
            lam /= 2
        else:
            raise NewtonDiverged(f"sin descenso tras amortiguar (residuo {residuo:.3g})")
    if residuo <= tol:
        return w, residuo, Config.NEWTON_MAX_ITER
    raise NewtonDiverged(f"{Config.NEWTON_MAX_ITER} iteraciones (residuo {residuo:.3g})")


def spirallike_membership(f: Any, A: OperatorA, t_grid: Sequence[float] = (0.5, 1.0, 2.0),
                          samples: int = 64, seed: int = Config.SEMILLA_DEFECTO,
                          radius: float = Config.RADIO_MEMBRESIA) -> Dict[str, Any]:
    """
    Para z con ‖z‖ ≤ radius y t en t_grid resuelve f(w) = e^{−tA}f(z) desde
    w = e^{−tA}z. Pasa si todas las soluciones encontradas cumplen ‖w‖ < 1;
    los puntos donde Newton no converge se cuentan como no concluyentes.
    """
    Z = bola_aleatoria(A.n, samples, radius, seed)
    imagenes = evaluar_lote(f, Z)

    def resolver(tarea: Tuple[float, int]) -> Dict[str, Any]:
        t, i = tarea
        E = matrix_exp(A.entries, -t)
        try:
            w, residuo, iteraciones = _newton(f, E @ imagenes[i], E @ Z[i], Config.TOL_NEWTON)
        except NewtonDiverged as e:
            return {"t": t, "index": i, "status": "inconclusive", "reason": str(e)}
        norma = float(np.linalg.norm(w))
        return {"t": t, "index": i, "status": "inside" if norma < 1 else "outside",
                "norm_w": norma, "residual": residuo, "iterations": iteraciones}

    tareas = [(float(t), i) for t in t_grid for i in range(Z.shape[0])]
    with ThreadPoolExecutor(max_workers=min(hilos_maximos(), len(tareas))) as pool:
        puntos = list(pool.map(resolver, tareas))

    fuera = [p for p in puntos if p["status"] == "outside"]
    dudosos = [p for p in puntos if p["status"] == "inconclusive"]
    if dudosos:
        log.warning(f"⚠️  spirallike_membership: {len(dudosos)} puntos no concluyentes")
    if fuera:
        log.warning(f"⚠️  spirallike_membership: {len(fuera)} soluciones fuera de la bola")
    return {
        "status": "ok",
        "points": len(puntos),
        "inside": sum(p["status"] == "inside" for p in puntos),
        "outside": len(fuera),
        "inconclusive": len(dudosos),
        "max_norm_w": max((p["norm_w"] for p in puntos if "norm_w" in p), default=None),
        "details": puntos,
        "passed": not fuera and len(dudosos) < len(puntos),
    }


# ──────────────────────────────────────────────────────────────────────────────
# ROPER–SUFFRIDGE
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(eq=False)
class RoperSuffridgeExtension:
    map:           RoperSuffridgeMap
    truncated:     TruncatedMap
    admissibility: Dict[str, Any]
    lam:           complex
    generator:     GeneratorSpec

    @property
    def A(self) -> OperatorA:
        return self.generator.A

    def __call__(self, z: Any) -> np.ndarray:
        return self.map(z)

    def jacobian(self, z: Any) -> np.ndarray:
        return self.map.jacobian(z)

    def to_json(self) -> Dict[str, Any]:
        return {
            "f": self.map.f1.name, "alpha": self.map.alpha, "beta": self.map.beta, "lambda": self.lam,
            "admissibility": self.admissibility, "taylor": self.truncated.to_json(),
        }


def roper_suffridge_extend(f1: Any, alpha: float, beta: float, lam: complex, K: int = 4,
                           rho: float = Config.RADIO_TORO, nodes: int = Config.NODOS_TORO) -> RoperSuffridgeExtension:
    """
    Φ_{α,β}(f)(z) = (f(z₁), (f(z₁)/z₁)^α (f'(z₁))^β z₂) sobre A = diag(1, λ),
    con los coeficientes de Taylor hasta grado K por cuadratura en el toro.
    """
    mapa = RoperSuffridgeMap(f1, alpha, beta)
    radios = np.linspace(0.05, Config.RADIO_RAMA, 20)
    angulos = np.exp(2j * np.pi * np.arange(64) / 64)
    z1 = np.outer(radios, angulos).ravel()
    with np.errstate(all="ignore"):
        cociente = mapa.f1.f(z1) / z1
        derivada = mapa.f1.df(z1)
    if not (np.all(np.isfinite(cociente)) and np.all(np.isfinite(derivada))
            and np.abs(cociente).min() > 1e-12 and np.abs(derivada).min() > 1e-12):
        raise BranchFailure(f"f(z₁)/z₁ o f'(z₁) se anula en |z₁| ≤ {Config.RADIO_RAMA}")

    taylor = taylor_homogeneos(mapa, 2, K, rho, nodes)
    truncado = TruncatedMap(
        2, K, {k: Q for k, Q in taylor.items() if k >= 2}, provenance="roper_suffridge",
        meta={"f": mapa.f1.name, "alpha": float(alpha), "beta": float(beta), "lambda": complex(lam)},
    )
    generador = roper_suffridge_generator(f1, alpha, beta, lam)
    log.info(f"✅ roper_suffridge_extend: {mapa.f1.name}, α={alpha}, β={beta}, λ={lam}")
    return RoperSuffridgeExtension(mapa, truncado, admissibility(lam, alpha, beta), complex(lam), generador)


# ──────────────────────────────────────────────────────────────────────────────
# TESTIGOS DE NO COMPACIDAD
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(eq=False)
class NoncompactnessWitness:
    map:         TruncatedMap
    generator:   PolynomialAutonomous
    certificate: Dict[str, Any]

    def to_json(self) -> Dict[str, Any]:
        return {"map": self.map.to_json(), "generator": self.generator.to_json(),
                "certificate": self.certificate}


def noncompactness_witness(A: OperatorA, M: float, k0: Optional[int] = None,
                           seed_field: Optional[HomPolyMap] = None) -> NoncompactnessWitness:
    """
    h(z) = Az + H_{k₀} con H_{k₀} en rango(B_{k₀}) y una solución de la
    ecuación espiral cuyo F_{k₀} está desplazado M veces en la dirección del
    núcleo. k₀ por defecto: el mayor orden resonante ≤ n₀.
    """
    if M < 0:
        raise ParameterOutOfRange(f"M = {M} < 0")
    resonantes = [k for k in range(2, A.n0 + 1) if resonant_labels(A.eigenvalues, k)]
    if k0 is None:
        if not resonantes:
            raise NotResonant(f"A sin resonancias hasta n₀ = {A.n0}")
        k0 = max(resonantes)
    elif not resonant_labels(A.eigenvalues, k0):
        raise NotResonant(f"B_{k0} no es singular")
    K = max(A.n0, k0)

    valores, V = bk_eigenbasis(A, k0)
    nulos = np.abs(valores) <= Config.TOL_RESONANCIA
    H = HomPolyMap.zeros(A.n, k0)
    if seed_field is not None:
        if (seed_field.n, seed_field.k) != (A.n, k0):
            raise DimensionMismatch(f"seed_field debe estar en P^{k0}(C^{A.n})")
        c = np.linalg.solve(V, seed_field.vector)
        H = HomPolyMap.from_vector(A.n, k0, V @ np.where(nulos, 0, c))
        norma = poly_norm(H)
        # ‖H(z)‖ ≤ poly_norm(H)‖z‖^{k₀} ⇒ Re⟨h,z⟩ ≥ (m(A) − poly_norm(H))‖z‖² en la bola
        if norma > A.m / 2:
            H = H * (A.m / (2 * norma))
    h = PolynomialAutonomous(A, {k0: H} if not H.is_zero() else {}, nombre=f"witness(k0={k0})")
    informe_h = validate(h, samples_per_sphere=256, strict=False)

    F: Dict[int, HomPolyMap] = {}
    direccion = None
    for k in range(2, K + 1):
        N = compute_Nk(F, h, k, n=A.n)
        F[k], nucleo, etiquetas = _resolver_orden(A, k, N)
        if k == k0:
            direccion = etiquetas[0]
            escala = M + poly_norm(F[k])
            F[k] = F[k] + nucleo[0] * escala if M > 0 else F[k]

    mapa = TruncatedMap(A.n, K, F, provenance="witness", meta={"k0": k0, "M": float(M)})
    residuo = spirallike_residual(mapa, h, A, K=K)
    norma_k0 = mapa.norm(k0)
    peor = max(f["residual"] for f in residuo["rows"])
    # con H = 0 la solución es exacta; con semilla el residuo es de orden K + 1
    residuo_ok = peor <= 1e-12 if H.is_zero() else residuo["passed"]
    certificado = {
        "k0": k0,
        "M": float(M),
        "kernel_direction": {"m": list(direccion[0]), "s": direccion[1]},
        "norm_F_k0": norma_k0,
        "norm_ok": norma_k0 >= M * (1 - 1e-12),
        "residual": peor,
        "residual_ok": bool(residuo_ok),
        "generator_valid": informe_h["passed"],
        "passed": bool(norma_k0 >= M * (1 - 1e-12) and residuo_ok and informe_h["passed"]),
    }
    log.info(f"✅ noncompactness_witness: k₀={k0}, ‖F_{k0}‖ = {norma_k0:.4g} ≥ M = {M:g}")
    return NoncompactnessWitness(mapa, h, certificado)
