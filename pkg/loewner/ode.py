# ==============================================================================
# ode.py
# Integrador Runge–Kutta encajado de Dormand–Prince 5(4) con control PI.
#
# El sistema complejo y' = f(t, y) en C^n se integra como sistema real de
# dimensión 2n. Error local por unidad de paso:
#     ‖err / escala‖∞ / (tol · h) ≤ 1,  escala_i = max(|y_i|, |y_new_i|, 1e-6)
# con la misma escala para Re e Im de cada componente. Los pasos se recortan
# para caer exactamente en los tiempos pedidos; entre pasos aceptados hay
# salida densa por interpolación cúbica de Hermite.
# ==============================================================================

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .config import Config
from .errores import StepFloor

log = logging.getLogger(__name__)

CampoComplejo = Callable[[float, np.ndarray], np.ndarray]
Vigilante = Callable[[float, np.ndarray], None]

# ── tabla de Butcher (Hairer–Nørsett–Wanner) ──────────────────────────────────
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

_EXP_I = 0.7 / 4
_EXP_P = 0.4 / 4


def a_real(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=complex)
    return np.concatenate([y.real, y.imag])


def a_complejo(Y: np.ndarray) -> np.ndarray:
    n = Y.shape[-1] // 2
    return Y[..., :n] + 1j * Y[..., n:]


@dataclass
class ResultadoODE:
    times:      np.ndarray
    values:     np.ndarray                  # (len(times), n) complejo
    pasos_t:    np.ndarray
    pasos_y:    np.ndarray                  # real (pasos, 2n)
    pasos_f:    np.ndarray
    stats:      Dict[str, int] = field(default_factory=dict)
    _spline:    Optional[CubicHermiteSpline] = None

    def at(self, t) -> np.ndarray:
        """Salida densa (Hermite cúbica entre pasos aceptados)."""
        if self.pasos_t.size < 2:
            return np.broadcast_to(self.values[0], np.shape(t) + self.values[0].shape).copy()
        if self._spline is None:
            self._spline = CubicHermiteSpline(self.pasos_t, self.pasos_y, self.pasos_f, axis=0)
        return a_complejo(self._spline(t))


def _paso_inicial(F: Callable, t0: float, Y0: np.ndarray, f0: np.ndarray, tol: float, tramo: float) -> float:
    d0 = float(np.max(np.abs(Y0))) if Y0.size else 0.0
    d1 = float(np.max(np.abs(f0))) if f0.size else 0.0
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-4
    h = min(h, tramo)
    Y1 = Y0 + h * f0
    d2 = float(np.max(np.abs(F(t0 + h, Y1) - f0))) / h
    if max(d1, d2) > 1e-15:
        h = min(100 * h, (0.01 / max(d1, d2)) ** (1 / 5), tramo)
    return max(h, Config.PASO_MINIMO * 10)


def integrar(f: CampoComplejo, y0: Sequence[complex], t0: float, t_end: float, tol: float,
             tiempos: Optional[Sequence[float]] = None, vigilante: Optional[Vigilante] = None,
             cortes: Sequence[float] = ()) -> ResultadoODE:
    """
    Integra y' = f(t, y) desde (t0, y0) hasta t_end.

    Parámetros
    ----------
    tiempos   : rejilla creciente en [t0, t_end] donde se devuelven valores
                exactos de paso (no interpolados); por defecto [t0, t_end].
    vigilante : se llama tras cada paso aceptado con (t, y); puede lanzar.
    cortes    : discontinuidades de f en t. Los pasos terminan en ellas y el
                siguiente arranca con el límite por la derecha.
    """
    y0 = np.asarray(y0, dtype=complex)
    n = y0.size
    rejilla = np.asarray(tiempos if tiempos is not None else [t0, t_end], dtype=float)
    rejilla = np.unique(np.concatenate([[t0], rejilla[(rejilla > t0) & (rejilla < t_end)], [t_end]]))
    saltos = {float(c) for c in cortes if t0 < c < t_end}
    paradas = np.unique(np.concatenate([rejilla, sorted(saltos)]))
    de_salida = np.isin(paradas, rejilla)

    def F(t: float, Y: np.ndarray) -> np.ndarray:
        return a_real(f(t, a_complejo(Y)))

    Y = a_real(y0)
    t = float(t0)
    fY = F(t, Y)
    valores = [y0.copy()]
    pasos_t, pasos_y, pasos_f = [t], [Y.copy()], [fY.copy()]
    aceptados = rechazados = evaluaciones = 0

    if t_end <= t0:
        return ResultadoODE(rejilla[:1], np.array(valores), np.array(pasos_t), np.array(pasos_y),
                            np.array(pasos_f), {"accepted": 0, "rejected": 0, "evaluations": 1})

    h_prop = _paso_inicial(F, t, Y, fY, tol, t_end - t0)
    evaluaciones += 2
    error_previo = 1.0
    siguiente = 1

    while siguiente < paradas.size:
        objetivo = paradas[siguiente]
        h = min(h_prop, objetivo - t)
        recortado = h < h_prop
        if h < Config.PASO_MINIMO * max(1.0, abs(t)):
            log.error(f"❌ integrar: paso {h:.3g} bajo el mínimo en t = {t:.6g}")
            raise StepFloor(t, h)

        K = [fY]
        for i in range(1, 7):
            incremento = sum(a * k for a, k in zip(_A[i], K) if a != 0.0)
            K.append(F(t + _C[i] * h, Y + h * incremento))
        evaluaciones += 6
        Y_nuevo = Y + h * sum(b * k for b, k in zip(_B5, K) if b != 0.0)
        err = h * sum(e * k for e, k in zip(_E, K))

        mod = np.maximum(np.abs(a_complejo(Y)), np.abs(a_complejo(Y_nuevo)))
        escala = np.tile(np.maximum(mod, Config.ESCALA_MIN_ODE), 2)
        razon = float(np.max(np.abs(err) / escala)) / (tol * h)

        if razon <= 1.0:
            t = objetivo if recortado or h == objetivo - t else t + h
            Y, fY = Y_nuevo, K[6]
            aceptados += 1
            pasos_t.append(t)
            pasos_y.append(Y.copy())
            pasos_f.append(fY.copy())
            if vigilante is not None:
                vigilante(t, a_complejo(Y))
            if t >= objetivo:
                if de_salida[siguiente]:
                    valores.append(a_complejo(Y))
                if float(objetivo) in saltos:
                    fY = F(float(np.nextafter(t, np.inf)), Y)
                    evaluaciones += 1
                siguiente += 1
            if razon == 0.0:
                factor = Config.FACTOR_PASO_MAX
            else:
                factor = Config.SEGURIDAD_PASO * razon ** (-_EXP_I) * error_previo ** _EXP_P
            factor = min(Config.FACTOR_PASO_MAX, max(Config.FACTOR_PASO_MIN, factor))
            h_nuevo = h * factor
            h_prop = max(h_nuevo, h_prop) if recortado else h_nuevo
            error_previo = max(razon, 1e-4)
        else:
            rechazados += 1
            factor = max(Config.FACTOR_PASO_MIN, Config.SEGURIDAD_PASO * razon ** (-1 / 4))
            h_prop = h * min(1.0, factor)

    stats = {"accepted": aceptados, "rejected": rechazados, "evaluations": evaluaciones}
    log.debug(f"integrar: [{t0:.4g}, {t_end:.4g}] {aceptados} pasos aceptados, {rechazados} rechazados")
    return ResultadoODE(rejilla, np.array(valores).reshape(-1, n), np.array(pasos_t),
                        np.array(pasos_y), np.array(pasos_f), stats)
