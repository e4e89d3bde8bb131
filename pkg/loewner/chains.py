# ==============================================================================
# chains.py
# Cadenas de Loewner como límite
#     g(z,s) = lim_{t→∞} e^{tA} (v + Σ_{k=2}^{n₀} F_k(v^k, t)),  v = v(z,s,t)
#
# Se integra el sistema aumentado
#     w = e^{(t−s)A} v                         (flujo reescalado, acotado)
#     ũ = e^{(t−s)A} (v + Σ F_k(v^k, t))       (g = e^{sA} ũ en el límite)
# con ũ' = e^{(t−s)A} R(v,t), donde R solo contiene términos de grado > n₀:
# los de grado ≤ n₀ se cancelan exactamente por las ecuaciones de
# coeficientes, así e^{tA} no amplifica el error de integración.
#
# Los puntos se agrupan en lotes (un único sistema EDO por lote) y los lotes
# corren en paralelo; el orden de salida es el de entrada.
# ==============================================================================

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import quad_vec
from scipy.optimize import minimize

from .coefficients import CoefficientSolution
from .config import Config, hilos_maximos
from .errores import (
    NoConvergence, NotDiagonalizable, ParameterOutOfRange, PreconditionViolated,
)
from .generators import GeneratorSpec
from .linalg_spectral import OperatorA
from .muestreo import esfera_sobol, evaluar_lote, taylor_homogeneos
from .ode import integrar
from .polyspace import HomPolyMap
from .serializacion import aplanar_complejos, columnas_complejas, escribir_csv, escribir_json
from .transition import integrate_batch

log = logging.getLogger(__name__)

Coeficientes = Mapping[int, CoefficientSolution]


# ──────────────────────────────────────────────────────────────────────────────
# CHAIN EVALUATION
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(eq=False)
class ChainEvaluation:
    h:                GeneratorSpec
    coeffs:           Dict[int, CoefficientSolution]
    s:                float
    points:           np.ndarray
    values:           np.ndarray
    T_used:           float
    tail_estimate:    float
    converged:        bool
    tol:              float
    tails:            np.ndarray = field(default=None, repr=False)
    increments:       List[Tuple[float, float]] = field(default_factory=list, repr=False)
    decay_rate:       Optional[float] = None
    theoretical_rate: Optional[float] = None
    decay_consistent: Optional[bool] = None
    parametric:       bool = False

    def to_json(self) -> Dict[str, Any]:
        return {
            "s": self.s,
            "points": int(self.points.shape[0]),
            "T_used": self.T_used,
            "tail_estimate": self.tail_estimate,
            "converged": self.converged,
            "tol": self.tol,
            "decay_rate": self.decay_rate,
            "theoretical_rate": self.theoretical_rate,
            "decay_consistent": self.decay_consistent,
            "parametric": self.parametric,
            "orders": sorted(self.coeffs),
            "generator_hash": self.h.hash(),
        }

    def export(self, ruta_csv: str) -> str:
        """CSV (z, g(z,s), tail_estimate, converged) y metadatos JSON junto a él."""
        n = self.points.shape[1]
        df = pd.DataFrame(
            np.hstack([aplanar_complejos(self.points), aplanar_complejos(self.values)]),
            columns=columnas_complejas("z", n) + columnas_complejas("g", n),
        )
        df["tail_estimate"] = self.tails
        df["converged"] = self.converged
        escribir_csv(ruta_csv, df)
        ruta_json = os.path.splitext(ruta_csv)[0] + ".json"
        escribir_json(ruta_json, self.to_json())
        return ruta_json


# ──────────────────────────────────────────────────────────────────────────────
# EVOLUCIÓN
# ──────────────────────────────────────────────────────────────────────────────

def _exponencial(A: OperatorA) -> Callable[[float], np.ndarray]:
    """τ ↦ e^{τA} por la autodescomposición fija de A."""
    if not A.diagonalizable:
        raise NotDiagonalizable(A.cond)
    lam = A.eigenvalues
    if A.is_diagonal:
        return lambda tau: np.diag(np.exp(lam * tau))
    P = A.eigenvectors
    Pinv = np.linalg.inv(P)
    return lambda tau: (P * np.exp(lam * tau)) @ Pinv


def _tol_ode(tol: float) -> float:
    return float(min(Config.TOL_MAX, max(Config.TOL_MIN, tol / 10)))


def _ajuste_decaimiento(incrementos: List[Tuple[float, float]]) -> Optional[float]:
    datos = np.array([(t, d) for t, d in incrementos if d > 1e-14])
    if len(datos) < 3:
        return None
    return float(-np.polyfit(datos[:, 0], np.log(datos[:, 1]), 1)[0])


def _evolucion(h: GeneratorSpec, coeffs: Coeficientes, Z: np.ndarray, s: float,
               tol: float) -> Dict[str, Any]:
    A = h.A
    n = A.n
    N = Z.shape[0]
    E = _exponencial(A)
    eSA = E(s)
    AT = A.entries.T
    con_F = bool(coeffs)
    soluciones = list(coeffs.values())
    tam = N * n

    def campo(t: float, y: np.ndarray) -> np.ndarray:
        W = y[:tam].reshape(N, n)
        Et = E(t - s)
        V = W @ E(s - t).T
        hv = np.atleast_2d(h(V, t))
        no_lineal = hv - V @ AT
        dW = -(no_lineal @ Et.T)
        if not con_F:
            return dW.ravel()
        R = -no_lineal
        for sol in soluciones:
            Fk, dFk = sol.at(t), sol.derivative_at(t)
            R = R + Fk.evaluate(V) @ AT + dFk.evaluate(V) - Fk.jacobian_apply(V, hv)
        return np.concatenate([dW.ravel(), (R @ Et.T).ravel()])

    def limite(y: np.ndarray) -> np.ndarray:
        U = y[tam:] if con_F else y[:tam]
        return U.reshape(N, n) @ eSA.T

    y = Z.ravel().astype(complex)
    if con_F:
        U0 = Z + sum(sol.at(s).evaluate(Z) for sol in soluciones)
        y = np.concatenate([y, U0.ravel()])

    delta = Config.PASO_CADENA / A.m
    por_bloque = int(round(Config.BLOQUE_CADENA / Config.PASO_CADENA))
    total = int(round(Config.FACTOR_T_MAX / Config.PASO_CADENA))
    t_max = s + total * delta
    tol_ode = _tol_ode(tol)

    u_prev = limite(y)
    ultimo = np.zeros(N)
    incrementos: List[Tuple[float, float]] = []
    racha = 0
    j = 0
    while j < total:
        j_fin = min(j + por_bloque, total)
        tiempos = s + delta * np.arange(j, j_fin + 1)
        res = integrar(campo, y, float(tiempos[0]), float(tiempos[-1]), tol_ode,
                       tiempos=tiempos, cortes=h.breakpoints)
        for t_i, y_i in zip(res.times[1:], res.values[1:]):
            u = limite(y_i)
            ultimo = np.linalg.norm(u - u_prev, axis=1)
            incrementos.append((float(t_i), float(ultimo.max())))
            u_prev = u
            racha = racha + 1 if ultimo.max() <= tol else 0
            if racha >= Config.RACHA_CONVERGENCIA:
                return {"values": u, "T": float(t_i), "tails": ultimo, "increments": incrementos}
        y = res.values[-1]
        j = j_fin

    log.error(f"❌ chain: sin convergencia en T_max = {t_max:.4g} (incremento {ultimo.max():.3g})")
    raise NoConvergence(t_max, float(ultimo.max()), parcial=u_prev)


def _lotes(h: GeneratorSpec, coeffs: Coeficientes, Z: np.ndarray, s: float,
           tol: float) -> List[Dict[str, Any]]:
    tam = Config.BLOQUE_PUNTOS
    bloques = [Z[i:i + tam] for i in range(0, Z.shape[0], tam)]
    if len(bloques) == 1:
        return [_evolucion(h, coeffs, bloques[0], s, tol)]
    with ThreadPoolExecutor(max_workers=min(hilos_maximos(), len(bloques))) as pool:
        return list(pool.map(lambda b: _evolucion(h, coeffs, b, s, tol), bloques))


def _puntos(h: GeneratorSpec, z: Any, s: float) -> np.ndarray:
    Z = np.atleast_2d(np.asarray(z, dtype=complex))
    if Z.shape[1] != h.n:
        raise ParameterOutOfRange(f"puntos de dimensión {Z.shape[1]} para C^{h.n}")
    if s < 0:
        raise ParameterOutOfRange(f"s = {s} < 0")
    radio = float(np.linalg.norm(Z, axis=1).max(initial=0.0))
    if radio > Config.RADIO_CADENA_MAX:
        raise ParameterOutOfRange(f"‖z‖ = {radio:.6g} > {Config.RADIO_CADENA_MAX}")
    return Z


def _evaluacion(h: GeneratorSpec, coeffs: Dict[int, CoefficientSolution], Z: np.ndarray, s: float,
                tol: float, partes: List[Dict[str, Any]], parametric: bool) -> ChainEvaluation:
    A = h.A
    incrementos: Dict[float, float] = {}
    for p in partes:
        for t, d in p["increments"]:
            incrementos[t] = max(d, incrementos.get(t, 0.0))
    serie = sorted(incrementos.items())
    tails = np.concatenate([p["tails"] for p in partes])
    teorica = 2 * A.m - A.k_plus if parametric else (A.n0 + 1) * A.m - A.k_plus
    ritmo = _ajuste_decaimiento(serie)
    # sin incrementos medibles no hay exponente que contrastar
    coherente = None if ritmo is None else bool(ritmo >= teorica - Config.HOLGURA_EXPONENTE)
    if coherente is False:
        log.warning(f"⚠️  chain: decaimiento medido {ritmo:.3g} < teórico {teorica:.3g} − {Config.HOLGURA_EXPONENTE}")
    return ChainEvaluation(
        h=h, coeffs=coeffs, s=float(s), points=Z, values=np.vstack([p["values"] for p in partes]),
        T_used=max(p["T"] for p in partes), tail_estimate=float(tails.max(initial=0.0)),
        converged=True, tol=tol, tails=tails, increments=serie,
        decay_rate=ritmo, theoretical_rate=teorica, decay_consistent=coherente, parametric=parametric,
    )


def chain_limit(h: GeneratorSpec, coeffs: Optional[Coeficientes], z: Any, s: float = 0.0,
                tol: float = 1e-8) -> ChainEvaluation:
    """
    g(z,s) para uno o varios puntos con ‖z‖ ≤ 0.95.

    Converge cuando 3 incrementos consecutivos de u(t) (rejilla Δ = 0.25/m(A))
    quedan bajo `tol`; NoConvergence si no ocurre antes de s + 40/m(A).
    """
    A = h.A
    coeffs = dict(coeffs or {})
    faltan = [k for k in range(2, A.n0 + 1) if k not in coeffs]
    if faltan:
        raise PreconditionViolated(f"faltan F_k para k = {faltan} (n₀ = {A.n0})")
    Z = _puntos(h, z, s)
    partes = _lotes(h, coeffs, Z, float(s), tol)
    ev = _evaluacion(h, coeffs, Z, s, tol, partes, parametric=False)
    log.info(f"✅ chain_limit: {Z.shape[0]} puntos, s={s:g}, T={ev.T_used:.4g}, cola={ev.tail_estimate:.2e}")
    return ev


def parametric_limit(h: GeneratorSpec, z: Any, s: float = 0.0, tol: float = 1e-8) -> ChainEvaluation:
    """lim_{t→∞} e^{tA} v(z,s,t): la fórmula de la cadena con todos los F_k ≡ 0."""
    A = h.A
    if 2 * A.m <= A.k_plus:
        log.warning(f"⚠️  parametric_limit: 2m(A) ≤ k₊(A); el límite puede no existir")
    Z = _puntos(h, z, s)
    partes = _lotes(h, {}, Z, float(s), tol)
    return _evaluacion(h, {}, Z, s, tol, partes, parametric=True)


# ──────────────────────────────────────────────────────────────────────────────
# COMPROBACIONES
# ──────────────────────────────────────────────────────────────────────────────

def chain_jacobian_at_origin(h: GeneratorSpec, coeffs: Optional[Coeficientes], s: float = 0.0,
                             tol: float = 1e-10, radio: float = Config.RADIO_DERIVADA_0,
                             nodos: int = Config.NODOS_DERIVADA_0) -> Dict[str, Any]:
    """
    Dg(0,s) por diferencias sobre el círculo |ζ| = radio en cada dirección e_j
    (exactas hasta grado `nodos`), comparada con e^{sA}.
    """
    n = h.n
    raices = np.exp(2j * np.pi * np.arange(nodos) / nodos)
    Z = np.vstack([np.outer(radio * raices, np.eye(n)[j]) for j in range(n)])
    g = chain_limit(h, coeffs, Z, s, tol).values.reshape(n, nodos, n)
    D = np.stack([(g[j] * raices.conj()[:, None]).mean(axis=0) / radio for j in range(n)], axis=1)
    esperado = _exponencial(h.A)(s)
    error = float(np.linalg.norm(D - esperado, 2)) / max(1.0, float(np.linalg.norm(esperado, 2)))
    return {"status": "ok", "s": float(s), "jacobian": D, "expected": esperado,
            "relative_error": error, "passed": error <= Config.TOL_DG0}


def check_subordination(h: GeneratorSpec, coeffs: Optional[Coeficientes], z: Any, s: float, t: float,
                        tol: float = 1e-8) -> Dict[str, Any]:
    """g(v(z,s,t), t) frente a g(z,s); pasa si la diferencia ≤ 100·tol."""
    if t < s:
        raise ParameterOutOfRange(f"se requiere s ≤ t (s={s}, t={t})")
    Z = _puntos(h, z, s)
    directo = chain_limit(h, coeffs, Z, s, tol)
    if t == s:
        V = Z
    else:
        tol_v = max(Config.TOL_MIN, tol / 100)
        V = np.array([tr.end for tr in integrate_batch(h, Z, s, t, tol_v, times=[s, t])])
    transportado = chain_limit(h, coeffs, V, t, tol)
    diferencias = np.linalg.norm(directo.values - transportado.values, axis=1)
    maxima = float(diferencias.max(initial=0.0))
    return {"status": "ok", "s": float(s), "t": float(t), "max_difference": maxima,
            "differences": diferencias, "passed": maxima <= 100 * tol}


def sphere_sup(mapa: Callable, n: int, r: float, samples: int = Config.MUESTRAS_ESFERA,
               seed: int = Config.SEMILLA_DEFECTO, refine: bool = True, starts: int = 4) -> Dict[str, Any]:
    """sup ‖mapa‖ sobre ‖z‖ = r: puntos Sobol y refinamiento Nelder–Mead desde los mejores."""
    Z = esfera_sobol(n, r, samples, seed)
    normas = np.linalg.norm(evaluar_lote(mapa, Z), axis=1)
    i_max = int(np.argmax(normas))
    mejor, punto = float(normas[i_max]), Z[i_max]

    def sobre_esfera(x: np.ndarray) -> np.ndarray:
        zc = x[:n] + 1j * x[n:]
        return r * zc / max(float(np.linalg.norm(zc)), 1e-300)

    def objetivo(x: np.ndarray) -> float:
        return -float(np.linalg.norm(evaluar_lote(mapa, sobre_esfera(x)[None, :])[0]))

    if refine:
        for i in np.argsort(normas)[::-1][:starts]:
            x0 = np.concatenate([Z[i].real, Z[i].imag])
            res = minimize(objetivo, x0, method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 1000 * n})
            if -res.fun > mejor:
                mejor, punto = float(-res.fun), sobre_esfera(res.x)
    return {"r": float(r), "sup": mejor, "argmax": punto}


def growth_profile(h: GeneratorSpec, coeffs: Optional[Coeficientes], s: float = 0.0,
                   radii: Optional[Sequence[float]] = None, samples: int = 64, tol: float = 1e-8,
                   seed: int = Config.SEMILLA_DEFECTO) -> List[ChainEvaluation]:
    """Una ChainEvaluation por radio, con puntos Sobol sobre cada esfera."""
    radii = radii or [r for r in Config.RADIOS_CRECIMIENTO if r <= Config.RADIO_CADENA_MAX]
    return [chain_limit(h, coeffs, esfera_sobol(h.n, float(r), samples, seed + i), s, tol)
            for i, r in enumerate(radii)]


def check_growth_bound(evaluations: Union[Sequence[ChainEvaluation], Callable], A: Optional[OperatorA] = None,
                       epsilon: float = Config.EPS_CRECIMIENTO, radii: Optional[Sequence[float]] = None,
                       samples: int = Config.MUESTRAS_ESFERA, seed: int = Config.SEMILLA_DEFECTO) -> Dict[str, Any]:
    """
    Exponente de sup_{‖z‖=r} ‖e^{−sA} g(z,s)‖ frente a 1/(1−r) (ajuste log–log
    sobre la mitad superior de los radios); debe ser ≤ 2k₊/m + ε + 0.1.

    `evaluations` es una lista de ChainEvaluation (una por radio) o
    directamente un mapa z ↦ e^{−sA}g(z,s), que se muestrea con sphere_sup.
    """
    filas: List[Dict[str, float]] = []
    if callable(evaluations):
        if A is None:
            raise ParameterOutOfRange("check_growth_bound con un mapa necesita A")
        for i, r in enumerate(radii or Config.RADIOS_CRECIMIENTO):
            sup = sphere_sup(evaluations, A.n, float(r), samples, seed + i)
            filas.append({"r": float(r), "sup": sup["sup"]})
    else:
        if not evaluations:
            raise ParameterOutOfRange("sin evaluaciones")
        A = A or evaluations[0].h.A
        E = _exponencial(A)
        for ev in evaluations:
            r = float(np.median(np.linalg.norm(ev.points, axis=1)))
            normas = np.linalg.norm(ev.values @ E(-ev.s).T, axis=1)
            filas.append({"r": r, "sup": float(normas.max())})

    filas.sort(key=lambda f: f["r"])
    ajuste = filas[len(filas) // 2:] if len(filas) >= 4 else filas
    x = np.log(1 / (1 - np.array([f["r"] for f in ajuste])))
    y = np.log([f["sup"] for f in ajuste])
    exponente = float(np.polyfit(x, y, 1)[0])

    base = 2 * A.k_plus / A.m
    cota = base + epsilon + Config.HOLGURA_EXPONENTE
    pasa = exponente <= cota
    informe: Dict[str, Any] = {"status": "ok", "rows": filas, "exponent": exponente,
                               "bound": cota, "epsilon": epsilon, "is_normal": A.is_normal}
    if A.is_normal:
        informe["sharp_bound"] = base + Config.HOLGURA_EXPONENTE
        pasa = pasa and exponente <= informe["sharp_bound"]
    informe["passed"] = pasa
    if not pasa:
        log.warning(f"⚠️  check_growth_bound: exponente {exponente:.4g} > {cota:.4g}")
    return informe


def univalence_spot_check(points: Union[ChainEvaluation, Any], values: Any = None,
                          mapa: Optional[Callable] = None,
                          jacobian_samples: int = Config.MUESTRAS_JACOBIANO,
                          seed: int = Config.SEMILLA_DEFECTO, paso: float = Config.PASO_DIF_FINITA) -> Dict[str, Any]:
    """
    min ‖g(zᵢ) − g(zⱼ)‖/‖zᵢ − zⱼ‖ sobre todos los pares (debe superar 1e-4) y
    |det Dg| en una muestra de puntos por diferencias centradas.
    """
    if isinstance(points, ChainEvaluation):
        ev = points
        Z, G = ev.points, ev.values
        if mapa is None:
            mapa = lambda W: chain_limit(ev.h, ev.coeffs, W, ev.s, ev.tol).values
    else:
        Z = np.atleast_2d(np.asarray(points, dtype=complex))
        G = np.atleast_2d(np.asarray(values, dtype=complex)) if values is not None else evaluar_lote(mapa, Z)
    if Z.shape[0] < Config.PUNTOS_INYECTIVIDAD:
        log.warning(f"⚠️  univalence_spot_check: solo {Z.shape[0]} puntos (< {Config.PUNTOS_INYECTIVIDAD})")

    minimo = np.inf
    for i in range(0, Z.shape[0], Config.BLOQUE_PUNTOS):
        dz = np.linalg.norm(Z[i:i + Config.BLOQUE_PUNTOS, None, :] - Z[None, :, :], axis=2)
        dg = np.linalg.norm(G[i:i + Config.BLOQUE_PUNTOS, None, :] - G[None, :, :], axis=2)
        validos = dz > 0
        if validos.any():
            minimo = min(minimo, float((dg[validos] / dz[validos]).min()))

    informe: Dict[str, Any] = {"status": "ok", "points": int(Z.shape[0]), "min_ratio": minimo}
    pasa = minimo > Config.MARGEN_INYECTIVIDAD
    if mapa is not None and jacobian_samples > 0:
        rng = np.random.default_rng(seed)
        elegidos = Z[rng.choice(Z.shape[0], size=min(jacobian_samples, Z.shape[0]), replace=False)]
        n = Z.shape[1]
        desplazados = np.concatenate([elegidos[:, None, :] + paso * np.eye(n)[None],
                                      elegidos[:, None, :] - paso * np.eye(n)[None]], axis=1)
        imagen = evaluar_lote(mapa, desplazados.reshape(-1, n)).reshape(len(elegidos), 2 * n, n)
        J = np.transpose((imagen[:, :n] - imagen[:, n:]) / (2 * paso), (0, 2, 1))
        determinantes = np.abs(np.linalg.det(J))
        informe["min_abs_jacobian_det"] = float(determinantes.min())
        pasa = pasa and informe["min_abs_jacobian_det"] > Config.MARGEN_INYECTIVIDAD
    informe["passed"] = bool(pasa)
    return informe


# ──────────────────────────────────────────────────────────────────────────────
# COEFICIENTES DE TAYLOR
# ──────────────────────────────────────────────────────────────────────────────

def taylor_coefficients(mapa: Callable, n: int, K: int, rho: float = Config.RADIO_TORO,
                        nodes: int = Config.NODOS_TORO) -> Dict[int, HomPolyMap]:
    """Partes homogéneas de grado 1..K por FFT sobre el toro |z_j| = ρ."""
    return taylor_homogeneos(mapa, n, K, rho, nodes)


def coefficient_recovery_check(h: GeneratorSpec, coeffs: Coeficientes, s: float = 0.0, tol: float = 1e-10,
                               rho: float = Config.RADIO_TORO, nodes: int = Config.NODOS_TORO,
                               tol_coef: float = 1e-6) -> Dict[str, Any]:
    """Coeficientes de Taylor de e^{−sA}g(·,s) frente a la identidad y F_k(s), k ≤ n₀."""
    A = h.A
    E_menos = _exponencial(A)(-s)
    mapa = lambda Z: chain_limit(h, coeffs, Z, s, tol).values @ E_menos.T
    taylor = taylor_coefficients(mapa, A.n, max(A.n0, 1), rho, nodes)

    filas = [{"k": 1, "error": float(np.abs(taylor[1].coeffs - HomPolyMap.identity(A.n).coeffs).max())}]
    for k in range(2, A.n0 + 1):
        sol = coeffs[k]
        esperado = sol.vector_at(s)
        obtenido = taylor[k].vector
        fila = {"k": k, "error": float(np.abs(obtenido - esperado).max())}
        if s == 0:
            fila["le_error"] = float(np.abs(sol.split.P_le @ obtenido - sol.F0_le).max())
        filas.append(fila)
    peor = max(max(f["error"], f.get("le_error", 0.0)) for f in filas)
    return {"status": "ok", "s": float(s), "rows": filas, "max_error": peor,
            "taylor": {k: Q for k, Q in taylor.items()}, "passed": peor <= tol_coef}


# ──────────────────────────────────────────────────────────────────────────────
# CONDICIÓN NECESARIA ASINTÓTICA
# ──────────────────────────────────────────────────────────────────────────────

def asymptotic_necessary_condition(h: GeneratorSpec, f_coeff_2: Optional[HomPolyMap], i: int, j: int,
                                   k_out: int, T_grid: Sequence[float],
                                   tol: float = Config.TOL_CONDICION_NEC) -> Dict[str, Any]:
    """
    Integrales parciales I(T) = ∫₀ᵀ e^{−uμ}(h_ij^k(u) + μ f_ij^k) du, μ = λᵢ + λⱼ − λ_k
    (índices 0..n−1). h_ij^k y f_ij^k son los coeficientes de z_i z_j e_k.
    """
    A = h.A
    if not A.is_diagonal:
        raise PreconditionViolated("A debe ser diagonal")
    if not h.is_polynomial:
        raise PreconditionViolated("se necesita un generador polinomial")
    if not all(0 <= x < A.n for x in (i, j, k_out)):
        raise PreconditionViolated(f"índices fuera de 0..{A.n - 1}")
    lam = A.eigenvalues
    mu = complex(lam[i] + lam[j] - lam[k_out])
    if mu.real > Config.TOL_RESONANCIA or abs(mu) <= Config.TOL_RESONANCIA:
        raise PreconditionViolated(f"μ = {mu:.6g}: se requiere Re μ ≤ 0 y μ ≠ 0")
    T_grid = np.sort(np.asarray(T_grid, dtype=float))
    if T_grid.size < 2 or T_grid[0] <= 0:
        raise PreconditionViolated("T_grid necesita al menos dos tiempos positivos")

    m = [0] * A.n
    m[i] += 1
    m[j] += 1
    f_c = f_coeff_2.coefficient(m, k_out) if f_coeff_2 is not None else 0j

    def integrando(u: float) -> np.ndarray:
        valor = np.exp(-u * mu) * (h.H_k(2, u).coefficient(m, k_out) + mu * f_c)
        return np.array([valor.real, valor.imag])

    parciales = np.empty(T_grid.size, dtype=complex)
    acumulado, previo = 0j, 0.0
    for idx, T in enumerate(T_grid):
        cortes = [b for b in h.breakpoints if previo < b < T]
        res, _ = quad_vec(integrando, previo, float(T), epsabs=1e-13, epsrel=1e-12, points=cortes or None)
        acumulado += complex(res[0], res[1])
        parciales[idx] = acumulado
        previo = float(T)

    cola = parciales[T_grid.size // 2:]
    dispersion = float(np.abs(cola - cola[-1]).max())
    cauchy = dispersion <= tol
    limite = complex(parciales[-1])
    return {
        "status": "ok",
        "mu": mu,
        "T_grid": T_grid,
        "partial_integrals": parciales,
        "tail_spread": dispersion,
        "cauchy": cauchy,
        "limit": limite,
        "limit_zero": bool(cauchy and abs(limite) <= tol),
        "bounded_away_from_zero": bool(np.abs(cola).min() > tol),
        "passed": bool(cauchy and abs(limite) <= tol),
    }
