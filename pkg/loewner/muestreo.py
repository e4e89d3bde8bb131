# ==============================================================================
# muestreo.py
# Muestreo cuasi-aleatorio reproducible y cuadratura en el toro.
#
#   esfera_sobol      : puntos Sobol sobre la esfera ‖z‖ = r de C^n
#   bola_aleatoria    : puntos dentro de la bola ‖z‖ < r (semilla fija)
#   coeficientes_toro : coeficientes de Taylor por FFT sobre |z_j| = ρ
#   taylor_homogeneos : los mismos agrupados en HomPolyMap por grado
# ==============================================================================

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, Tuple

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .config import Config
from .polyspace import HomPolyMap, monomials

log = logging.getLogger(__name__)

MapaLote = Callable[[np.ndarray], np.ndarray]


def esfera_sobol(n: int, r: float, muestras: int, semilla: int = Config.SEMILLA_DEFECTO) -> np.ndarray:
    """
    Puntos de la esfera de radio r en C^n: Sobol en [0,1)^{2n} → normales por
    la inversa de la CDF → normalización. Devuelve un array (muestras, n).
    """
    motor = qmc.Sobol(d=2 * n, scramble=True, seed=semilla)
    u = motor.random_base2(max(0, math.ceil(math.log2(max(muestras, 1)))))[:muestras]
    g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    z = g[:, :n] + 1j * g[:, n:]
    normas = np.linalg.norm(z, axis=1, keepdims=True)
    normas[normas == 0] = 1.0
    return r * z / normas


def bola_aleatoria(n: int, cuantos: int, radio_max: float,
                   semilla: int = Config.SEMILLA_DEFECTO) -> np.ndarray:
    """Puntos uniformes en la bola de radio radio_max de C^n."""
    rng = np.random.default_rng(semilla)
    g = rng.standard_normal((cuantos, n)) + 1j * rng.standard_normal((cuantos, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radios = radio_max * rng.random(cuantos) ** (1.0 / (2 * n))
    return g * radios[:, None]


def evaluar_lote(mapa: Callable, Z: np.ndarray) -> np.ndarray:
    """Evalúa un mapa sobre un lote (M, n); si no acepta lotes, punto a punto."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    try:
        salida = np.asarray(mapa(Z), dtype=complex)
        if salida.shape == Z.shape:
            return salida
    except (TypeError, ValueError):
        pass
    return np.array([np.asarray(mapa(z), dtype=complex) for z in Z])


def rejilla_toro(n: int, rho: float, nodos: int) -> np.ndarray:
    angulos = 2 * np.pi * np.arange(nodos) / nodos
    circulo = rho * np.exp(1j * angulos)
    mallas = np.meshgrid(*([circulo] * n), indexing="ij")
    return np.stack([m.ravel() for m in mallas], axis=1)


def coeficientes_toro(mapa: Callable, n: int, grado_max: int,
                      rho: float = Config.RADIO_TORO,
                      nodos: int = Config.NODOS_TORO) -> Dict[Tuple[int, ...], np.ndarray]:
    """
    Coeficientes c_m ∈ C^n de z^m para 0 ≤ |m| ≤ grado_max.

    Regla del trapecio en cada círculo |z_j| = ρ (FFT n-dimensional); el
    aliasing viene de términos de grado ≥ nodos y decae como ρ^nodos.
    """
    if grado_max >= nodos:
        raise ValueError(f"nodos={nodos} insuficientes para grado {grado_max}")
    Z = rejilla_toro(n, rho, nodos)
    valores = evaluar_lote(mapa, Z).reshape((nodos,) * n + (n,))
    espectro = np.fft.fftn(valores, axes=tuple(range(n))) / nodos ** n

    salida: Dict[Tuple[int, ...], np.ndarray] = {}
    for m in np.ndindex(*((grado_max + 1,) * n)):
        grado = sum(m)
        if grado <= grado_max:
            salida[tuple(int(x) for x in m)] = espectro[m] / rho ** grado
    log.debug(f"coeficientes_toro: n={n}, K={grado_max}, ρ={rho}, {nodos}^{n} nodos")
    return salida


def taylor_homogeneos(mapa: Callable, n: int, grado_max: int,
                      rho: float = Config.RADIO_TORO,
                      nodos: int = Config.NODOS_TORO) -> Dict[int, HomPolyMap]:
    """Partes homogéneas de grado 1..grado_max del desarrollo de Taylor en 0."""
    coeficientes = coeficientes_toro(mapa, n, grado_max, rho, nodos)
    salida: Dict[int, HomPolyMap] = {}
    for k in range(1, grado_max + 1):
        filas = np.array([coeficientes[m] for m in monomials(n, k)])
        salida[k] = HomPolyMap(n, k, filas)
    return salida
