# ==============================================================================
# coefficients.py
# Ecuaciones de coeficientes dF_k/dt = B_k F_k + N_k, k = 2..n₀.
#
# La solución polinomialmente acotada usa la función de Green
#     G_L(t) =  e^{tL} P^≤   (t ≥ 0)
#     G_L(t) = −e^{tL} P^+   (t < 0)
#     F(t)   = e^{tL} F0_le + ∫_0^t e^{(t−u)L} P^≤ N(u) du − ∫_t^∞ e^{(t−u)L} P^+ N(u) du
#
# Se trabaja en coordenadas propias de B_k (modos desacoplados). Los modos
# nulos se clasifican con la fórmula exacta ⟨m,λ⟩ − λ_s, no con un umbral.
# El cálculo entre grados es secuencial en k; dentro de un grado la
# evaluación en cada t está memoizada.
# ==============================================================================

from __future__ import annotations

import logging
import math
import os
import threading
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial
import pandas as pd
from scipy.integrate import quad_vec

from .config import Config
from .errores import (
    GeneratorInvalid, MissingLowerOrder, NotDiagonalizable, ProjectedInitialDatum,
    ResonantUnbounded,
)
from .generators import GeneratorSpec, PolynomialAutonomous
from .linalg_spectral import OperatorA, SpectralSplit
from .muestreo import taylor_homogeneos
from .polyspace import (
    HomPolyMap, basis_labels, bk_eigenbasis, build_Bk, compose_jacobian, resonant_labels,
)
from .serializacion import escribir_csv, escribir_json

log = logging.getLogger(__name__)

CampoN = Callable[[float], Union[HomPolyMap, np.ndarray]]


def _vector(x: Union[HomPolyMap, np.ndarray, complex, None], dim: int) -> np.ndarray:
    if x is None:
        return np.zeros(dim, dtype=complex)
    if isinstance(x, HomPolyMap):
        return x.vector.astype(complex)
    return np.atleast_1d(np.asarray(x, dtype=complex)).reshape(dim)


# ──────────────────────────────────────────────────────────────────────────────
# COEFFICIENT SOLUTION
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(eq=False)
class CoefficientSolution:
    k:           Optional[int]
    A:           Optional[OperatorA]
    Bk:          np.ndarray
    split:       SpectralSplit
    F0_le:       np.ndarray
    bound_poly:  Polynomial
    horizon:     Optional[float]
    bounded:     bool
    constant:    bool
    n:           Optional[int] = None
    N:           Optional[CampoN] = field(default=None, repr=False)
    _coordenadas: Callable[[float], np.ndarray] = field(default=None, repr=False)
    _derivada:   Callable[[float], np.ndarray] = field(default=None, repr=False)

    def vector_at(self, t: float) -> np.ndarray:
        return self.split.eigenvectors @ self._coordenadas(float(t))

    def at(self, t: float) -> Union[HomPolyMap, np.ndarray]:
        """F_k(t) como HomPolyMap (o vector si el operador no es un B_k)."""
        v = self.vector_at(t)
        if self.n is not None and self.k is not None:
            return HomPolyMap.from_vector(self.n, self.k, v)
        return v

    def derivative_at(self, t: float) -> Union[HomPolyMap, np.ndarray]:
        """dF_k/dt = B_k F_k + N_k en t, sin diferencias finitas."""
        v = self.split.eigenvectors @ self._derivada(float(t))
        if self.n is not None and self.k is not None:
            return HomPolyMap.from_vector(self.n, self.k, v)
        return v

    @property
    def evaluator(self) -> Callable[[float], Union[HomPolyMap, np.ndarray]]:
        return self.at

    def norm_at(self, t: float) -> float:
        return float(np.abs(self.vector_at(t)).sum())

    def to_json(self) -> Dict[str, Any]:
        salida = {
            "k": self.k,
            "split": self.split.to_json(),
            "F0_le": self.F0_le,
            "horizon": self.horizon,
            "bounded": self.bounded,
            "constant": self.constant,
            "bound_poly": self.bound_poly.coef.tolist(),
        }
        if self.A is not None and self.k is not None:
            salida["resonances"] = [{"m": list(m), "s": s} for m, s in resonant_labels(self.A.eigenvalues, self.k)]
            salida["real_part_resonances"] = [{"m": list(m), "s": s}
                                              for m, s in resonant_labels(self.A.eigenvalues, self.k, solo_real=True)]
        return salida

    def export(self, ruta_csv: str, t_grid: Sequence[float]) -> str:
        """Tabla (t, Re/Im de cada coeficiente) en CSV y metadatos en JSON."""
        filas = np.array([self.vector_at(t) for t in t_grid])
        if self.n is not None and self.k is not None:
            nombres = [f"{''.join(map(str, m))}_{s}" for m, s in basis_labels(self.n, self.k)]
        else:
            nombres = [str(i + 1) for i in range(filas.shape[1])]
        datos: Dict[str, Any] = {"t": np.asarray(t_grid, dtype=float)}
        for j, nombre in enumerate(nombres):
            datos[f"re_c{nombre}"] = filas[:, j].real
            datos[f"im_c{nombre}"] = filas[:, j].imag
        escribir_csv(ruta_csv, pd.DataFrame(datos))
        ruta_json = os.path.splitext(ruta_csv)[0] + ".json"
        escribir_json(ruta_json, self.to_json())
        return ruta_json


# ──────────────────────────────────────────────────────────────────────────────
# N_k
# ──────────────────────────────────────────────────────────────────────────────

def _H(H: Any, k: int, t: float, n: int) -> HomPolyMap:
    if isinstance(H, GeneratorSpec):
        return H.H_k(k, t)
    if isinstance(H, Mapping):
        Q = H.get(k)
        return Q if Q is not None else HomPolyMap.zeros(n, k)
    raise GeneratorInvalid("H debe ser un generador polinomial o un dict k → HomPolyMap")


def _F(F: Any, j: int, t: float) -> HomPolyMap:
    valor = F[j]
    return valor.at(t) if isinstance(valor, CoefficientSolution) else valor


def compute_Nk(F: Mapping[int, Any], H: Any, k: int, t: float = 0.0, n: Optional[int] = None) -> HomPolyMap:
    """
    N_k(z^k,t) = H_k(z^k,t) + Σ_{j=2}^{k−1} DF_j(z,t)·H_{k−j+1}(z^{k−j+1},t)

    `F` admite CoefficientSolution (dependientes de t) o HomPolyMap fijos.
    """
    faltantes = [j for j in range(2, k) if j not in F]
    if faltantes:
        raise MissingLowerOrder(k, faltantes)
    if n is None:
        n = H.n if isinstance(H, GeneratorSpec) else next(iter(H.values())).n
    N = _H(H, k, t, n)
    for j in range(2, k):
        Hj = _H(H, k - j + 1, t, n)
        if Hj.is_zero():
            continue
        N = N + compose_jacobian(_F(F, j, t), Hj)
    return N


# ──────────────────────────────────────────────────────────────────────────────
# SOLVER
# ──────────────────────────────────────────────────────────────────────────────

def _fase_integrada(mu: np.ndarray, t: float) -> np.ndarray:
    # ∫_0^t e^{μ(t−u)} du = (e^{μt} − 1)/μ, con límite t cuando μt → 0
    mt = mu * t
    pequeno = np.abs(mt) < 1e-8
    mu_seguro = np.where(pequeno, 1.0, mu)
    return np.where(pequeno, t * (1 + mt / 2), (np.exp(mt) - 1) / mu_seguro)


def _cuadratura(f: Callable[[float], np.ndarray], a: float, b: float,
                cortes: Sequence[float], dim: int) -> np.ndarray:
    if b <= a or dim == 0:
        return np.zeros(dim, dtype=complex)

    def real(u):
        v = f(u)
        return np.concatenate([v.real, v.imag])
    puntos = [p for p in cortes if a < p < b]
    res, _ = quad_vec(real, a, b, epsabs=Config.TOL_CUADRATURA, epsrel=Config.TOL_CUADRATURA,
                      points=puntos or None)
    mitad = res.size // 2
    return res[:mitad] + 1j * res[mitad:]


def solve_polybounded(Bk: np.ndarray, split: SpectralSplit, N: CampoN,
                      F0_le: Union[HomPolyMap, np.ndarray, None] = None, *,
                      n: Optional[int] = None, k: Optional[int] = None,
                      A: Optional[OperatorA] = None, breakpoints: Sequence[float] = (),
                      N_constant: bool = False) -> CoefficientSolution:
    """
    Solución polinomialmente acotada de x' = Lx + N(t) con P^≤x(0) = F0_le.

    Parámetros
    ----------
    split       : SpectralSplit de L con autobase (eigenvectors) conocida.
    N_constant  : N no depende de t → forma cerrada en cada modo.
    breakpoints : tiempos donde N no es suave (para la cuadratura).
    """
    if split.eigenvectors is None:
        raise NotDiagonalizable(float("inf"))
    V = split.eigenvectors
    W = np.linalg.inv(V)
    mu = split.eigenvalues
    dim = mu.size
    mas = split.mask_plus
    menos = ~mas
    cero = split.mask_zero

    x0 = _vector(F0_le, dim)
    c0 = W @ x0
    if np.any(np.abs(c0[mas]) > Config.TOL_PROYECCION * max(1.0, float(np.abs(x0).max(initial=0.0)))):
        warnings.warn("F0_le no está en el rango de P^≤; se proyecta", ProjectedInitialDatum, stacklevel=2)
        log.warning(f"⚠️  solve_polybounded(k={k}): F0_le proyectado sobre rango(P^≤)")
    c0 = np.where(mas, 0, c0)
    x0 = V @ c0

    @lru_cache(maxsize=8192)
    def nu(t: float) -> np.ndarray:
        return W @ _vector(N(t), dim)

    # ── cola certificada para los modos σ₊ ────────────────────────────────────
    # ventana de muestreo: nunca acaba antes del último corte de N
    ultimo_corte = max((float(b) for b in breakpoints), default=0.0)
    ventana = max(Config.HORIZONTE_AJUSTE, ultimo_corte + Config.MARGEN_CORTES)

    def sup_nu(a: float, b: float) -> float:
        muestras = np.union1d(np.linspace(a, b, Config.PUNTOS_AJUSTE),
                              [float(c) for c in breakpoints if a <= c <= b])
        return 2.0 * max(float(np.linalg.norm(nu(float(u))[mas])) for u in muestras)

    @lru_cache(maxsize=1024)
    def horizonte_en(t0: float) -> float:
        # U tal que la cola ∫_U^∞ queda bajo TOL_COLA_INTEGRAL con ‖ν‖ ≤ N_sup en [t0, t0 + U]
        delta = float(np.min(mu[mas].real))
        largo = max(Config.HORIZONTE_AJUSTE, ventana - t0)
        U = 0.0
        for _ in range(Config.ITER_HORIZONTE):
            n_sup = sup_nu(t0, t0 + largo)
            if n_sup <= 0:
                return 0.0
            cota = split.cond * n_sup / (delta * Config.TOL_COLA_INTEGRAL)
            U = max(0.0, math.log(cota) / delta) if cota > 1 else 0.0
            if U <= largo:
                break
            largo = U
        return U

    horizonte: Optional[float] = None
    if mas.any() and not N_constant:
        horizonte = horizonte_en(0.0)
        log.debug(f"solve_polybounded(k={k}): ventana={ventana:.4g}, U={horizonte:.4g}")

    # ── coordenadas propias en t ──────────────────────────────────────────────
    # Sin forma cerrada, F_k(t) se obtiene del ancla más próxima (cada
    # PASO_ANCLA) más una cuadratura corta: hacia delante para los modos σ_≤,
    # hacia atrás para los σ₊.
    mu_m, mu_p = mu[menos], mu[mas]
    n_m, n_p = int(menos.sum()), int(mas.sum())
    paso = Config.PASO_ANCLA
    anclas_menos: List[np.ndarray] = [c0[menos]]
    cerrojo = threading.Lock()

    def integral_menos(a: float, b: float) -> np.ndarray:
        # ∫_a^b e^{μ(b−u)} ν(u) du
        return _cuadratura(lambda u: np.exp(mu_m * (b - u)) * nu(float(u))[menos], a, b, breakpoints, n_m)

    def ancla_menos(j: int) -> np.ndarray:
        with cerrojo:
            while len(anclas_menos) <= j:
                i = len(anclas_menos)
                anclas_menos.append(np.exp(mu_m * paso) * anclas_menos[-1]
                                    + integral_menos((i - 1) * paso, i * paso))
            return anclas_menos[j]

    @lru_cache(maxsize=1024)
    def ancla_mas(j: int) -> np.ndarray:
        # −∫_0^U e^{−μw} ν(t_j + w) dw
        t_j = j * paso
        U = horizonte_en(t_j) if horizonte is not None else 0.0
        if not U:
            return np.zeros(n_p, dtype=complex)
        return -_cuadratura(lambda w: np.exp(-mu_p * w) * nu(float(t_j + w))[mas],
                            0.0, U, [b - t_j for b in breakpoints], n_p)

    @lru_cache(maxsize=4096)
    def coordenadas(t: float) -> np.ndarray:
        c = np.zeros(dim, dtype=complex)
        if N_constant:
            v = nu(0.0)
            c[menos] = np.exp(mu_m * t) * c0[menos] + v[menos] * _fase_integrada(mu_m, t)
            c[mas] = -v[mas] / mu_p
            return c
        if n_m:
            j = int(t // paso)
            t_j = j * paso
            c[menos] = np.exp(mu_m * (t - t_j)) * ancla_menos(j) + integral_menos(t_j, t)
        if n_p:
            j = int(math.ceil(t / paso))
            t_j = j * paso
            tramo = _cuadratura(lambda u: np.exp(mu_p * (t - u)) * nu(float(u))[mas], t, t_j, breakpoints, n_p)
            c[mas] = np.exp(mu_p * (t - t_j)) * ancla_mas(j) - tramo
        return c

    def derivada(t: float) -> np.ndarray:
        return mu * coordenadas(t) + nu(float(t))

    # ── test de Cauchy sobre los modos σ₀ ─────────────────────────────────────
    acotada = True
    if cero.any():
        T = ventana
        mu_0 = mu[cero]
        n_0 = int(cero.sum())
        if N_constant:
            # ν constante: solo un autovalor exactamente nulo produce crecimiento lineal
            v0 = nu(0.0)[cero]
            crece = (np.abs(v0) > Config.TOL_RESONANCIA) & (np.abs(mu_0) <= Config.TOL_RESONANCIA)
            acotada = not crece.any()
        else:
            integrando = lambda u: np.exp(-mu_0 * u) * nu(float(u))[cero]
            I_mitad = _cuadratura(integrando, 0.0, T / 2, breakpoints, n_0)
            I_total = I_mitad + _cuadratura(integrando, T / 2, T, breakpoints, n_0)
            acotada = bool(np.all(np.abs(I_total - I_mitad) <= 1e-8 * (1 + np.abs(I_total))))
        if not acotada:
            warnings.warn(f"σ₀(B_{k}) ≠ ∅ y ∫P⁰N no converge: solución no acotada",
                          ResonantUnbounded, stacklevel=2)
            log.warning(f"⚠️  solve_polybounded(k={k}): resonancia con crecimiento polinomial")

    # ── constante en t ────────────────────────────────────────────────────────
    constante = False
    if N_constant:
        v = nu(0.0)
        resto = c0[menos] * mu[menos] + v[menos]
        constante = bool(np.all(np.abs(resto) <= Config.TOL_RESONANCIA * (1 + np.abs(v[menos]))))

    # ── envolvente polinomial ────────────────────────────────────────────────
    rejilla = np.union1d(np.linspace(0.0, ventana, Config.PUNTOS_AJUSTE), [float(c) for c in breakpoints])
    normas = np.array([float(np.abs(V @ coordenadas(float(t))).sum()) for t in rejilla])
    if acotada:
        envolvente = Polynomial([float(normas.max()) * (1 + 1e-6)])
    else:
        pendiente = max(0.0, float(np.polyfit(rejilla, normas, 1)[0]))
        ordenada = float(np.max(normas - pendiente * rejilla))
        envolvente = Polynomial([ordenada * (1 + 1e-6), pendiente * (1 + 1e-6)])

    return CoefficientSolution(
        k=k, A=A, Bk=np.asarray(Bk), split=split, F0_le=x0, bound_poly=envolvente,
        horizon=horizonte, bounded=acotada, constant=constante, n=n, N=N,
        _coordenadas=coordenadas, _derivada=lambda t: derivada(float(t)),
    )


def bk_split(A: OperatorA, k: int) -> SpectralSplit:
    """SpectralSplit de B_k con autobase y σ₀ exactos por la fórmula de multi-índices."""
    if not A.diagonalizable:
        raise NotDiagonalizable(A.cond)
    B = build_Bk(A, k)
    valores, V = bk_eigenbasis(A, k)
    cero = np.abs(valores.real) <= Config.TOL_RESONANCIA
    return SpectralSplit.from_eigenbasis(B, valores, V, zero_mask=cero)


def solve_chain_coefficients(h: GeneratorSpec, F0_le: Optional[Mapping[int, HomPolyMap]] = None,
                             k_max: Optional[int] = None) -> Dict[int, CoefficientSolution]:
    """
    F_k para k = 2..k_max (por defecto n₀), secuencialmente en k.

    Un generador autónomo no polinomial (push-forward) se sustituye por su
    desarrollo de Taylor hasta k_max, extraído por cuadratura en el toro.
    """
    A = h.A
    k_max = A.n0 if k_max is None else k_max
    if not h.is_polynomial:
        if not h.is_autonomous:
            raise GeneratorInvalid(f"{h.nombre}: generador no polinomial y dependiente de t")
        H = {k: Q for k, Q in taylor_homogeneos(h, A.n, k_max).items() if k >= 2}
        h = PolynomialAutonomous(A, H, nombre=f"taylor({h.nombre}, K={k_max})")
        log.info(f"coeficientes: {h.nombre} truncado a grado {k_max} por cuadratura en el toro")
    F0_le = dict(F0_le or {})
    soluciones: Dict[int, CoefficientSolution] = {}

    for k in range(2, k_max + 1):
        split = bk_split(A, k)
        autonomo = all(h.H_is_constant(j) for j in range(2, k + 1)) and \
            all(soluciones[j].constant for j in range(2, k))
        campo = (lambda kk: (lambda t: compute_Nk(soluciones, h, kk, t)))(k)
        soluciones[k] = solve_polybounded(
            split.operator, split, campo, F0_le.get(k), n=A.n, k=k, A=A,
            breakpoints=h.breakpoints, N_constant=autonomo,
        )
        sol = soluciones[k]
        log.info(
            f"✅ coeficientes k={k}: |σ₊|={int(split.mask_plus.sum())}, |σ₀|={int(split.mask_zero.sum())}, "
            f"acotada={sol.bounded}, U={sol.horizon}"
        )
    return soluciones


# ──────────────────────────────────────────────────────────────────────────────
# COMPROBACIONES E INFORMES
# ──────────────────────────────────────────────────────────────────────────────

def residual_check(sol: CoefficientSolution, N: CampoN, t_grid: Sequence[float],
                   paso: float = Config.PASO_DERIVADA) -> Dict[str, Any]:
    """dF/dt por diferencias (centradas, o de segundo orden hacia delante en t < paso) frente a BF + N."""
    dim = sol.Bk.shape[0]
    filas: List[Dict[str, float]] = []
    for t in t_grid:
        t = float(t)
        if t >= paso:
            derivada = (sol.vector_at(t + paso) - sol.vector_at(t - paso)) / (2 * paso)
        else:
            derivada = (-3 * sol.vector_at(t) + 4 * sol.vector_at(t + paso) - sol.vector_at(t + 2 * paso)) / (2 * paso)
        F = sol.vector_at(t)
        residuo = float(np.max(np.abs(derivada - sol.Bk @ F - _vector(N(t), dim))))
        escala = 1.0 + float(np.abs(F).sum())
        filas.append({"t": t, "residual": residuo, "relative": residuo / escala})
    maximo = max(f["relative"] for f in filas)
    return {"status": "ok", "rows": filas, "max_relative_residual": maximo,
            "passed": maximo <= Config.TOL_RESIDUO_COEF}


def resonance_report(A: OperatorA, k_max: int = 2) -> Dict[str, Any]:
    """Resonancias exactas y de parte real (las de A + Ā) para k = 2..max(k_max, n₀)."""
    if not A.diagonalizable:
        raise NotDiagonalizable(A.cond)
    tope = max(k_max, A.n0)
    filas = []
    for k in range(2, tope + 1):
        exactas = resonant_labels(A.eigenvalues, k)
        reales = resonant_labels(A.eigenvalues, k, solo_real=True)
        filas.append({
            "k": k,
            "exact": [{"m": list(m), "s": s} for m, s in exactas],
            "real_part": [{"m": list(m), "s": s} for m, s in reales],
        })
    sin_exactas = all(not f["exact"] for f in filas)
    sin_reales = all(not f["real_part"] for f in filas)
    mas_alla = all(not f["exact"] for f in filas if f["k"] > A.n0)
    if not mas_alla:
        log.error(f"❌ resonance_report: resonancia exacta con k > n₀ = {A.n0}")
    return {
        "status": "ok",
        "n0": A.n0,
        "orders": filas,
        "nonresonant": sin_exactas,
        "A_plus_conj_nonresonant": sin_reales,
        "no_resonance_beyond_n0": mas_alla,
        "passed": mas_alla,
    }
