# ==============================================================================
# linalg_spectral.py
# Análisis espectral de A y de operadores derivados (B_k).
#
#   analyze               : OperatorA con m(A), k₋, k₊, n₀
#   matrix_exp            : e^{tL} (autodescomposición o Padé de scipy)
#   exp_norm_certificates : ‖e^{tA}‖ frente a e^{t k₊(A)}
#   spectral_split        : proyecciones espectrales P⁺, P^≤, P⁰
#
# Todas las funciones son puras: sin estado compartido, seguras entre hilos.
# ==============================================================================

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .config import Config
from .errores import (
    DimensionMismatch, IllConditioned, NotAccretive, NotDiagonalizable,
    ZeroBoundaryAmbiguous,
)

log = logging.getLogger(__name__)


def _como_cuadrada(matriz: Any) -> np.ndarray:
    M = np.asarray(matriz, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"se esperaba una matriz cuadrada, forma {M.shape}")
    return M


def _es_diagonal(M: np.ndarray) -> bool:
    return not np.any(M - np.diag(np.diag(M)))


# ──────────────────────────────────────────────────────────────────────────────
# OPERATOR A
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class OperatorA:
    entries:        np.ndarray
    n:              int
    eigenvalues:    np.ndarray          # con multiplicidad; orden diagonal si A es diagonal
    eigenvectors:   np.ndarray
    cond:           float
    diagonalizable: bool
    m:              float
    k_minus:        float
    k_plus:         float
    n0:             int

    @property
    def is_diagonal(self) -> bool:
        return _es_diagonal(self.entries)

    @property
    def is_normal(self) -> bool:
        A = self.entries
        return float(np.linalg.norm(A @ A.conj().T - A.conj().T @ A, 2)) < Config.TOL_NORMAL

    @property
    def lam(self) -> np.ndarray:
        return self.eigenvalues

    def exp(self, t: float) -> np.ndarray:
        return matrix_exp(self.entries, t)

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "matrix": {"n": self.n, "re": self.entries.real.tolist(), "im": self.entries.imag.tolist()},
            "eigenvalues": [complex(x) for x in self.eigenvalues],
            "m": self.m,
            "k_minus": self.k_minus,
            "k_plus": self.k_plus,
            "n0": self.n0,
            "diagonalizable": self.diagonalizable,
            "eigenvector_cond": self.cond,
            "is_normal": self.is_normal,
            "is_diagonal": self.is_diagonal,
        }


def analyze(matrix: Any) -> OperatorA:
    """
    Índices espectrales de A.

    m(A) es el menor autovalor de la parte hermítica (A + A*)/2, que coincide
    con min Re⟨Az, z⟩ sobre la esfera unidad.
    """
    A = _como_cuadrada(matrix)
    n = A.shape[0]

    hermitica = (A + A.conj().T) / 2
    m = float(np.linalg.eigvalsh(hermitica)[0])
    if m <= 0:
        log.error(f"❌ analyze: m(A) = {m:.6g} ≤ 0")
        raise NotAccretive(m)

    if _es_diagonal(A):
        valores = np.diag(A).copy()
        vectores = np.eye(n, dtype=complex)
        cond = 1.0
    else:
        valores, vectores = sla.eig(A)
        cond = float(np.linalg.cond(vectores))

    diagonalizable = bool(np.isfinite(cond) and cond <= Config.COND_MAX)
    if not diagonalizable:
        warnings.warn(
            f"matriz de autovectores de A mal condicionada (cond = {cond:.3g})",
            IllConditioned, stacklevel=2,
        )
        log.warning(f"⚠️  analyze: cond(V) = {cond:.3g} > {Config.COND_MAX:.0e}")

    k_minus = float(np.min(valores.real))
    k_plus = float(np.max(valores.real))
    n0 = max(1, int(math.floor(k_plus / m + 1e-9)))

    op = OperatorA(
        entries=A, n=n, eigenvalues=valores, eigenvectors=vectores, cond=cond,
        diagonalizable=diagonalizable, m=m, k_minus=k_minus, k_plus=k_plus, n0=n0,
    )
    log.debug(f"analyze: n={n}, m={m:.6g}, k₋={k_minus:.6g}, k₊={k_plus:.6g}, n₀={n0}")
    return op


# ──────────────────────────────────────────────────────────────────────────────
# EXPONENCIAL
# ──────────────────────────────────────────────────────────────────────────────

def matrix_exp(L: Any, t: float = 1.0) -> np.ndarray:
    """
    e^{tL}. Matrices diagonales y bien condicionadas por autodescomposición;
    el resto por escalado y cuadrado con aproximante de Padé (scipy.linalg.expm).
    """
    L = _como_cuadrada(L)
    n = L.shape[0]
    if t == 0 or not np.any(L):
        return np.eye(n, dtype=complex)
    if _es_diagonal(L):
        return np.diag(np.exp(t * np.diag(L)))

    valores, V = sla.eig(L)
    if np.linalg.cond(V) <= Config.COND_EXP_EIG:
        return np.linalg.solve(V.T, (V * np.exp(t * valores)).T).T
    return sla.expm(t * L)


def exp_norm_certificates(A: OperatorA, t_grid: Sequence[float]) -> Dict[str, Any]:
    t_grid = [float(t) for t in t_grid]
    if not t_grid or min(t_grid) < 0:
        raise ValueError("t_grid debe ser no vacío y con t ≥ 0")

    normal = A.is_normal
    filas: List[Dict[str, float]] = []
    violaciones: List[float] = []
    for t in t_grid:
        norma = float(np.linalg.norm(matrix_exp(A.entries, t), 2))
        razon = norma / math.exp(t * A.k_plus)
        filas.append({"t": t, "norm": norma, "ratio": razon})
        if normal and abs(razon - 1.0) > Config.TOL_IGUALDAD_NORMAL:
            violaciones.append(t)

    if violaciones:
        log.warning(f"⚠️  exp_norm_certificates: A normal pero ‖e^{{tA}}‖ ≠ e^{{t k₊}} en t={violaciones}")
    return {
        "status": "ok",
        "is_normal": normal,
        "k_plus": A.k_plus,
        "rows": filas,
        "max_ratio": max(f["ratio"] for f in filas),
        "normal_equality_violations": violaciones,
        "passed": not violaciones,
    }


# ──────────────────────────────────────────────────────────────────────────────
# SPECTRAL SPLIT
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class SpectralSplit:
    operator:    np.ndarray
    eigenvalues: np.ndarray
    mask_plus:   np.ndarray
    mask_zero:   np.ndarray
    P_plus:      np.ndarray
    P_le:        np.ndarray
    P_zero:      np.ndarray
    cond:        float = 1.0
    eigenvectors: Optional[np.ndarray] = None
    meta:        Dict[str, Any] = field(default_factory=dict)

    @property
    def sigma_plus(self) -> np.ndarray:
        return self.eigenvalues[self.mask_plus]

    @property
    def sigma_le(self) -> np.ndarray:
        return self.eigenvalues[~self.mask_plus]

    @property
    def sigma_zero(self) -> np.ndarray:
        return self.eigenvalues[self.mask_zero]

    @property
    def delta_plus(self) -> Optional[float]:
        """min Re σ₊(L), o None si σ₊ = ∅."""
        return float(np.min(self.sigma_plus.real)) if self.mask_plus.any() else None

    @classmethod
    def from_eigenbasis(cls, L: np.ndarray, eigenvalues: np.ndarray, vectors: np.ndarray,
                        zero_mask: Optional[np.ndarray] = None) -> "SpectralSplit":
        """
        Split a partir de una autobase conocida (columnas de `vectors`).
        `zero_mask` fija la clasificación exacta de σ₀ y prevalece sobre el umbral.
        """
        L = _como_cuadrada(L)
        valores = np.asarray(eigenvalues, dtype=complex)
        V = np.asarray(vectors, dtype=complex)
        cond = float(np.linalg.cond(V))
        if not np.isfinite(cond) or cond > Config.COND_MAX:
            raise NotDiagonalizable(cond)

        if zero_mask is None:
            cero = np.abs(valores.real) < Config.TOL_CERO_REAL
        else:
            cero = np.asarray(zero_mask, dtype=bool)
        mas = (valores.real >= Config.TOL_CERO_REAL) & ~cero

        W = np.linalg.inv(V)
        P_plus = V[:, mas] @ W[mas, :]
        P_zero = V[:, cero] @ W[cero, :]
        P_le = np.eye(L.shape[0], dtype=complex) - P_plus
        return cls(operator=L, eigenvalues=valores, mask_plus=mas, mask_zero=cero,
                   P_plus=P_plus, P_le=P_le, P_zero=P_zero, cond=cond, eigenvectors=V)

    def check_invariants(self, tol: float = Config.TOL_PROYECCION) -> Dict[str, Any]:
        L, Pp, Pl, P0 = self.operator, self.P_plus, self.P_le, self.P_zero
        I = np.eye(L.shape[0])
        escala = max(1.0, float(np.linalg.norm(L, 2)))
        medidas = {
            "sum_identity":   float(np.linalg.norm(Pp + Pl - I, 2)),
            "orthogonal":     float(np.linalg.norm(Pp @ Pl, 2)),
            "idempotent":     max(float(np.linalg.norm(Pp @ Pp - Pp, 2)),
                                  float(np.linalg.norm(Pl @ Pl - Pl, 2))),
            "commute":        max(float(np.linalg.norm(Pp @ L - L @ Pp, 2)),
                                  float(np.linalg.norm(Pl @ L - L @ Pl, 2))) / escala,
            "block_zero":     float(np.linalg.norm(Pp @ L @ Pl, 2)) / escala,
            "zero_in_le":     float(np.linalg.norm(Pl @ P0 - P0, 2)),
        }
        return {"status": "ok", **medidas, "passed": all(v <= tol * 10 for v in medidas.values())}

    def to_json(self) -> Dict[str, Any]:
        return {
            "sigma_plus": [complex(x) for x in self.sigma_plus],
            "sigma_le": [complex(x) for x in self.sigma_le],
            "sigma_zero": [complex(x) for x in self.sigma_zero],
            "delta_plus": self.delta_plus,
            "eigenvector_cond": self.cond,
        }


def spectral_split(L: Any, zero_count: Optional[int] = None) -> SpectralSplit:
    """
    Parte el espectro de L por el signo de la parte real (umbral 1e-9).

    Parámetros
    ----------
    zero_count : número exacto de autovalores con Re = 0 según la fórmula de
                 multi-índices, si se conoce; una discrepancia con el umbral
                 numérico lanza ZeroBoundaryAmbiguous.
    """
    L = _como_cuadrada(L)
    if _es_diagonal(L):
        valores, V = np.diag(L).copy(), np.eye(L.shape[0], dtype=complex)
    else:
        valores, V = sla.eig(L)

    cond = float(np.linalg.cond(V))
    if not np.isfinite(cond) or cond > Config.COND_MAX:
        log.error(f"❌ spectral_split: cond(V) = {cond:.3g}")
        raise NotDiagonalizable(cond)

    cero = np.abs(valores.real) < Config.TOL_CERO_REAL
    if zero_count is not None and int(cero.sum()) != zero_count:
        raise ZeroBoundaryAmbiguous(valores[cero], zero_count)
    return SpectralSplit.from_eigenbasis(L, valores, V, zero_mask=cero)
