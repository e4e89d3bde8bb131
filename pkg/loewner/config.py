# ==============================================================================
# config.py
# Constantes numéricas, variables de entorno y arranque del logging.
#
# Todas las tolerancias que usan los módulos viven aquí; la CLI puede
# sobreescribir las de cada ejecución a través de RunConfig.
#
# Variables de entorno:
#   LOEWNER_THREADS    : tope de hilos para lotes de puntos (def. núm. CPUs)
#   LOEWNER_LOG_LEVEL  : nivel de logging (def. INFO)
#   LOEWNER_LOG_FILE   : si existe, añade un RotatingFileHandler
#   LOEWNER_RAPIDO     : "1" reduce los tamaños de `loewner verify`
# ==============================================================================

from __future__ import annotations

import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional


class Config:
    # ── linalg_spectral ───────────────────────────────────────────────────────
    TOL_CERO_REAL:        float = 1e-9     # umbral |Re λ| para σ₀
    COND_MAX:             float = 1e8      # cond. de la matriz de autovectores
    COND_EXP_EIG:         float = 1e4      # por encima, expm usa Padé
    TOL_NORMAL:           float = 1e-10    # ‖AA* − A*A‖ para declarar A normal
    TOL_IGUALDAD_NORMAL:  float = 1e-9     # ‖e^{tA}‖ = e^{t k₊} si A es normal
    TOL_PROYECCION:       float = 1e-9

    # ── polyspace / resonancias ───────────────────────────────────────────────
    TOL_RESONANCIA:       float = 1e-10

    # ── generators ────────────────────────────────────────────────────────────
    TOL_VIOLACION:        float = 1e-12    # Re⟨h,z⟩ < −TOL → generador inválido
    TOL_JACOBIANO_0:      float = 1e-6
    PASO_DIF_FINITA:      float = 1e-5
    SEMILLA_DEFECTO:      int   = 7

    # ── transition / ode ──────────────────────────────────────────────────────
    MARGEN_BOLA:          float = 1e-13    # ‖v‖ ≥ 1 − MARGEN → BallExit
    PASO_MINIMO:          float = 1e-14
    ESCALA_MIN_ODE:       float = 1e-6     # piso de la escala relativa del error
    SEGURIDAD_PASO:       float = 0.9
    FACTOR_PASO_MIN:      float = 0.2
    FACTOR_PASO_MAX:      float = 5.0
    TOL_MIN:              float = 1e-12
    TOL_MAX:              float = 1e-4
    HOLGURA_DECAIMIENTO:  float = 0.05
    COLA_MINIMA:          float = 5.0      # t_end − s ≥ COLA_MINIMA/m(A)

    # ── coefficients ──────────────────────────────────────────────────────────
    TOL_COLA_INTEGRAL:    float = 1e-10
    TOL_CUADRATURA:       float = 1e-12
    TOL_RESIDUO_COEF:     float = 1e-6
    HORIZONTE_AJUSTE:     float = 20.0     # ventana para la envolvente ‖F_k(t)‖
    PUNTOS_AJUSTE:        int   = 41
    PASO_DERIVADA:        float = 1e-4
    PASO_ANCLA:           float = 0.5      # separación de los valores de F_k guardados en t
    MARGEN_CORTES:        float = 5.0      # la ventana de muestreo pasa del último corte de N
    ITER_HORIZONTE:       int   = 8

    # ── chains ────────────────────────────────────────────────────────────────
    FACTOR_T_MAX:         float = 40.0     # T_max = s + FACTOR/m(A)
    RACHA_CONVERGENCIA:   int   = 3
    PASO_CADENA:          float = 0.25     # Δ = PASO/m(A)
    BLOQUE_CADENA:        float = 5.0      # longitud de cada tramo integrado (×1/m)
    EPS_CRECIMIENTO:      float = 0.1
    HOLGURA_EXPONENTE:    float = 0.1
    RADIOS_CRECIMIENTO:   tuple = (0.5, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99)
    RADIO_TORO:           float = 0.4
    NODOS_TORO:           int   = 64
    MARGEN_INYECTIVIDAD:  float = 1e-4
    RADIO_CADENA_MAX:     float = 0.95
    BLOQUE_PUNTOS:        int   = 256      # puntos por sistema EDO en un lote
    MUESTRAS_ESFERA:      int   = 256
    MUESTRAS_JACOBIANO:   int   = 50
    PUNTOS_INYECTIVIDAD:  int   = 1000
    RADIO_DERIVADA_0:     float = 0.1      # círculo para Dg(0,s)
    NODOS_DERIVADA_0:     int   = 16
    TOL_DG0:              float = 1e-5
    TOL_CONDICION_NEC:    float = 1e-6

    # ── spirallike ────────────────────────────────────────────────────────────
    NEWTON_MAX_ITER:      int   = 50
    TOL_NEWTON:           float = 1e-9
    RADIO_MEMBRESIA:      float = 0.8
    RADIO_RAMA:           float = 0.95

    # ── verify ────────────────────────────────────────────────────────────────
    # la variante rápida solo para iterar en local (--rapido / LOEWNER_RAPIDO)
    TAMANOS_VERIFY:       dict  = {"bk_matrices": 20, "bk_grado_max": 4, "identidades": 1000,
                                   "oraculo_puntos": 20, "desigualdad_generadores": 100,
                                   "desigualdad_puntos": 10, "normales": 10}
    TAMANOS_VERIFY_RAPIDO: dict = {"bk_matrices": 6, "bk_grado_max": 3, "identidades": 60,
                                   "oraculo_puntos": 4, "desigualdad_generadores": 5,
                                   "desigualdad_puntos": 4, "normales": 5}

    # ── CLI ───────────────────────────────────────────────────────────────────
    DIMENSION_MAX_CLI:    int   = 4
    DIGITOS_CSV:          str   = "%.17g"


def hilos_maximos() -> int:
    """Tope de paralelismo leído de LOEWNER_THREADS (mínimo 1)."""
    bruto = os.environ.get("LOEWNER_THREADS", "")
    try:
        n = int(bruto) if bruto.strip() else (os.cpu_count() or 1)
    except ValueError:
        logging.getLogger(__name__).warning(
            f"⚠️  LOEWNER_THREADS='{bruto}' no es un entero, se usa 1 hilo"
        )
        n = 1
    return max(1, n)


def tamanos_verify(rapido: bool = False) -> dict:
    return dict(Config.TAMANOS_VERIFY_RAPIDO if rapido else Config.TAMANOS_VERIFY)


def configurar_logging(nivel: Optional[str] = None, archivo: Optional[str] = None) -> None:
    nivel   = (nivel or os.environ.get("LOEWNER_LOG_LEVEL", "INFO")).upper()
    archivo = archivo or os.environ.get("LOEWNER_LOG_FILE")

    logging.basicConfig(
        level=getattr(logging, nivel, logging.INFO),
        format='%(asctime)s %(levelname)s: %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        encoding='utf-8',
    )
    if archivo:
        manejador = RotatingFileHandler(archivo, maxBytes=1_024_000, backupCount=5, encoding='utf-8')
        manejador.setFormatter(logging.Formatter('%(asctime)s %(levelname)s: %(message)s'))
        logging.getLogger().addHandler(manejador)
