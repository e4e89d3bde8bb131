# ==============================================================================
# transition.py
# Ecuación de transición ∂v/∂t = −h(v, t), v(z, s, s) = z.
#
#   integrate                  : Trajectory con salida densa y estadísticas
#   integrate_batch            : varios puntos en paralelo, orden de entrada
#   example_transition         : solución cerrada del generador de ejemplo
#   check_transition_inequality, check_schwarz, check_semigroup,
#   check_component_bounds     : informes con `passed`
# ==============================================================================

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .config import Config, hilos_maximos
from .errores import BallExit, InsufficientTail, ParameterOutOfRange
from .generators import GeneratorSpec, TimeFunction, _como_tiempo
from .linalg_spectral import OperatorA
from .ode import ResultadoODE, integrar
from .serializacion import escribir_csv, escribir_json, tabla_compleja

log = logging.getLogger(__name__)

PUNTOS_REJILLA_DEFECTO = 101


# ──────────────────────────────────────────────────────────────────────────────
# TRAJECTORY
# ──────────────────────────────────────────────────────────────────────────────

@dataclass
class Trajectory:
    z0:             np.ndarray
    s:              float
    times:          np.ndarray
    values:         np.ndarray
    tol:            float
    step_stats:     Dict[str, int]
    generator_hash: str = ""
    _ode:           Optional[ResultadoODE] = field(default=None, repr=False)

    @property
    def end(self) -> np.ndarray:
        return self.values[-1]

    def at(self, t: Any) -> np.ndarray:
        """v(z, s, t) en cualquier t de [s, t_end] (salida densa)."""
        if self._ode is None:
            raise ValueError("trayectoria sin salida densa")
        return self._ode.at(t)

    def to_json(self) -> Dict[str, Any]:
        return {
            "z0": self.z0, "s": self.s, "t_end": float(self.times[-1]),
            "samples": int(self.times.size), "tol": self.tol,
            "step_stats": self.step_stats, "generator_hash": self.generator_hash,
        }

    def export(self, ruta_csv: str) -> str:
        """CSV (t, Re v₁, Im v₁, …) y metadatos JSON junto a él; devuelve la ruta del JSON."""
        escribir_csv(ruta_csv, tabla_compleja(self.times, self.values, "v"))
        ruta_json = os.path.splitext(ruta_csv)[0] + ".json"
        escribir_json(ruta_json, self.to_json())
        return ruta_json


# ──────────────────────────────────────────────────────────────────────────────
# INTEGRACIÓN
# ──────────────────────────────────────────────────────────────────────────────

def _comprobar_tol(tol: float) -> None:
    if not Config.TOL_MIN <= tol <= Config.TOL_MAX:
        raise ParameterOutOfRange(f"tol = {tol:g} fuera de [{Config.TOL_MIN:g}, {Config.TOL_MAX:g}]")


def integrate(h: GeneratorSpec, z: Any, s: float = 0.0, t_end: float = 10.0, tol: float = 1e-9,
              times: Optional[Sequence[float]] = None) -> Trajectory:
    """
    Parámetros
    ----------
    times : rejilla de salida en [s, t_end]; por defecto 101 puntos
            equiespaciados. Los extremos se añaden siempre.
    """
    z = np.asarray(z, dtype=complex)
    if z.shape != (h.n,):
        raise ParameterOutOfRange(f"punto de forma {z.shape} para C^{h.n}")
    if np.linalg.norm(z) >= 1:
        raise ParameterOutOfRange(f"‖z‖ = {np.linalg.norm(z):.6g} ≥ 1")
    if t_end < s or s < 0:
        raise ParameterOutOfRange(f"se requiere 0 ≤ s ≤ t_end (s={s}, t_end={t_end})")
    _comprobar_tol(tol)
    if times is None:
        times = np.linspace(s, t_end, PUNTOS_REJILLA_DEFECTO)

    limite = 1.0 - Config.MARGEN_BOLA

    def vigilante(t: float, v: np.ndarray) -> None:
        norma = float(np.linalg.norm(v))
        if norma >= limite:
            log.error(f"❌ integrate: ‖v‖ = {norma:.15f} en t = {t:.6g}")
            raise BallExit(t, norma)

    resultado = integrar(lambda t, v: -h(v, t), z, float(s), float(t_end), tol,
                         tiempos=times, vigilante=vigilante, cortes=h.breakpoints)
    return Trajectory(z0=z.copy(), s=float(s), times=resultado.times, values=resultado.values,
                      tol=tol, step_stats=resultado.stats, generator_hash=h.hash(), _ode=resultado)


def integrate_batch(h: GeneratorSpec, points: Any, s: float = 0.0, t_end: float = 10.0,
                    tol: float = 1e-9, times: Optional[Sequence[float]] = None) -> List[Trajectory]:
    """Una trayectoria por punto, en el orden de entrada."""
    puntos = np.atleast_2d(np.asarray(points, dtype=complex))
    with ThreadPoolExecutor(max_workers=min(hilos_maximos(), max(1, len(puntos)))) as pool:
        trayectorias = list(pool.map(lambda z: integrate(h, z, s, t_end, tol, times), puntos))
    log.info(f"✅ integrate_batch: {len(trayectorias)} trayectorias en [{s:g}, {t_end:g}]")
    return trayectorias


# ──────────────────────────────────────────────────────────────────────────────
# ORÁCULO CERRADO
# ──────────────────────────────────────────────────────────────────────────────

def _integral_tramo(lam: complex, a: TimeFunction, s: float, t0: float, t1: float) -> complex:
    # ∫_{t0}^{t1} a(u) e^{(λ−2)(u−s)} du
    if t1 <= t0:
        return 0j

    def integrando(u):
        valor = a(u) * np.exp((lam - 2) * (u - s))
        return np.array([valor.real, valor.imag])

    cortes = [b for b in a.breakpoints if t0 < b < t1]
    res, _ = quad_vec(integrando, t0, t1, epsabs=1e-14, epsrel=1e-13, points=cortes or None)
    return complex(res[0], res[1])


def example_transition(lam: complex, a: Any, z: Any, s: float, t: Any) -> np.ndarray:
    """
    v(z,s,t) = (e^{−λ(t−s)}(z₁ − I_s(t) z₂²), e^{−(t−s)} z₂) para
    h(z,t) = (λz₁ + a(t)z₂², z₂), con I_s(t) = ∫_s^t a(u) e^{(λ−2)(u−s)} du.
    Acepta t escalar o una rejilla creciente (la integral se acumula por tramos).
    """
    lam = complex(lam)
    a = _como_tiempo(a)
    z = np.asarray(z, dtype=complex)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if ts[0] < s or np.any(np.diff(ts) < 0):
        raise ParameterOutOfRange("la rejilla debe ser creciente y empezar en t ≥ s")

    integrales = np.empty(ts.size, dtype=complex)
    acumulado, previo = 0j, float(s)
    for i, ti in enumerate(ts):
        acumulado += _integral_tramo(lam, a, s, previo, float(ti))
        integrales[i] = acumulado
        previo = float(ti)

    d = ts - s
    salida = np.stack([np.exp(-lam * d) * (z[0] - integrales * z[1] ** 2), np.exp(-d) * z[1]], axis=1)
    return salida[0] if np.ndim(t) == 0 else salida


# ──────────────────────────────────────────────────────────────────────────────
# COMPROBACIONES
# ──────────────────────────────────────────────────────────────────────────────

def check_transition_inequality(traj: Trajectory, A: OperatorA) -> Dict[str, Any]:
    """‖v‖/(1−‖v‖)² ≤ e^{m(A)(s−t)} ‖z‖/(1−‖z‖)² en cada tiempo muestreado."""
    normas = np.linalg.norm(traj.values, axis=1)
    r0 = float(np.linalg.norm(traj.z0))
    izq = normas / (1 - normas) ** 2
    der = np.exp(A.m * (traj.s - traj.times)) * r0 / (1 - r0) ** 2
    razones = np.where(der > 0, izq / np.where(der > 0, der, 1.0), np.where(izq > 0, np.inf, 0.0))
    maxima = float(np.max(razones))
    return {
        "status": "ok",
        "max_ratio": maxima,
        "argmax_t": float(traj.times[int(np.argmax(razones))]),
        "passed": maxima <= 1 + 1e-6,
    }


def check_schwarz(traj: Trajectory, tol: float = 1e-9) -> Dict[str, Any]:
    """‖v(t)‖ ≤ ‖z‖ y ‖v(t)‖ no creciente (salvo tolerancia)."""
    normas = np.linalg.norm(traj.values, axis=1)
    exceso = float(np.max(normas - np.linalg.norm(traj.z0)))
    subida = float(np.max(np.diff(normas))) if normas.size > 1 else 0.0
    return {"status": "ok", "max_excess": exceso, "max_increase": subida,
            "passed": exceso <= tol and subida <= tol}


def check_semigroup(h: GeneratorSpec, z: Any, s: float, u: float, t: float,
                    tol: float = 1e-9) -> Dict[str, Any]:
    """v(z,s,t) frente a v(v(z,s,u),u,t); pasa si la diferencia ≤ 50·tol."""
    if not s <= u <= t:
        raise ParameterOutOfRange(f"se requiere s ≤ u ≤ t (s={s}, u={u}, t={t})")
    directo = integrate(h, z, s, t, tol, times=[s, t]).end
    intermedio = integrate(h, z, s, u, tol, times=[s, u]).end
    compuesto = integrate(h, intermedio, u, t, tol, times=[u, t]).end
    diferencia = float(np.linalg.norm(directo - compuesto))
    return {"status": "ok", "difference": diferencia, "direct": directo, "composed": compuesto,
            "passed": diferencia <= 50 * tol}


def check_component_bounds(traj: Trajectory, A: OperatorA) -> Dict[str, Any]:
    """
    Exponente de decaimiento de cada |v_i| por mínimos cuadrados sobre la
    mitad final de la rejilla; debe ser ≥ min(Re λ_i, 2m(A)) − 0.05.
    """
    if not A.is_diagonal:
        raise ParameterOutOfRange("check_component_bounds requiere A diagonal")
    cola = float(traj.times[-1] - traj.s)
    if cola < Config.COLA_MINIMA / A.m:
        raise InsufficientTail(f"t_end − s = {cola:.4g} < {Config.COLA_MINIMA}/m(A) = {Config.COLA_MINIMA / A.m:.4g}")

    mitad = traj.times.size // 2
    t_cola = traj.times[mitad:]
    filas: List[Dict[str, Any]] = []
    for i, lam_i in enumerate(A.eigenvalues):
        umbral = min(lam_i.real, 2 * A.m) - Config.HOLGURA_DECAIMIENTO
        modulo = np.abs(traj.values[mitad:, i])
        utiles = modulo > 1e-280
        if utiles.sum() < 2:
            filas.append({"component": i + 1, "rate": None, "threshold": umbral, "passed": True})
            continue
        pendiente = np.polyfit(t_cola[utiles], np.log(modulo[utiles]), 1)[0]
        tasa = float(-pendiente)
        filas.append({"component": i + 1, "rate": tasa, "threshold": umbral, "passed": tasa >= umbral})
    return {"status": "ok", "components": filas, "passed": all(f["passed"] for f in filas)}
