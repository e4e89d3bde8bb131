# ==============================================================================
# polyspace.py
# Aplicaciones polinomiales homogéneas P^k(C^n) y los operadores B_k.
#
# Base de monomios z^m e_s con |m| = k: los multi-índices en orden
# lexicográfico descendente (z₁^k primero) y la componente s variando más
# rápido → índice plano = idx(m)·n + s. El orden es fijo para que las
# matrices B_k sean reproducibles bit a bit.
#
# En JSON y en los informes la componente s va de 1 a n; internamente de 0.
# ==============================================================================

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.special import comb

from .config import Config
from .errores import DimensionMismatch, ParameterOutOfRange, SchemaError
from .linalg_spectral import OperatorA, matrix_exp
from .serializacion import exigir

log = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]


# ──────────────────────────────────────────────────────────────────────────────
# TABLAS DE ÍNDICES (cacheadas por (n, k))
# ──────────────────────────────────────────────────────────────────────────────

def _composiciones(n: int, k: int) -> Iterable[MultiIndex]:
    if n == 1:
        yield (k,)
        return
    for primero in range(k, -1, -1):
        for resto in _composiciones(n - 1, k - primero):
            yield (primero,) + resto


@lru_cache(maxsize=None)
def monomials(n: int, k: int) -> Tuple[MultiIndex, ...]:
    """Multi-índices de grado k en orden lexicográfico descendente."""
    return tuple(_composiciones(n, k))


@lru_cache(maxsize=None)
def _indice(n: int, k: int) -> Dict[MultiIndex, int]:
    return {m: i for i, m in enumerate(monomials(n, k))}


@lru_cache(maxsize=None)
def _exponentes(n: int, k: int) -> np.ndarray:
    E = np.array(monomials(n, k), dtype=int).reshape(-1, n)
    E.setflags(write=False)
    return E


def space_dim(n: int, k: int) -> int:
    """dim P^k(C^n) = n·C(n+k−1, k)."""
    return n * int(comb(n + k - 1, k, exact=True))


def basis_labels(n: int, k: int) -> List[Tuple[MultiIndex, int]]:
    """(m, s) por índice plano, con s en 1..n."""
    return [(m, s + 1) for m in monomials(n, k) for s in range(n)]


def _potencias(Z: np.ndarray, E: np.ndarray) -> np.ndarray:
    # (N, n) × (M, n) → (N, M) con z^m
    return np.prod(Z[:, None, :] ** E[None, :, :], axis=2)


# ──────────────────────────────────────────────────────────────────────────────
# HOMPOLYMAP
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class HomPolyMap:
    n:      int
    k:      int
    coeffs: np.ndarray        # (número de monomios, n)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(len(monomials(self.n, self.k)), self.n)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # ── construcción ─────────────────────────────────────────────────────────
    @classmethod
    def zeros(cls, n: int, k: int) -> "HomPolyMap":
        return cls(n, k, np.zeros((len(monomials(n, k)), n), dtype=complex))

    @classmethod
    def monomial(cls, n: int, m: Sequence[int], s: int, c: complex = 1.0) -> "HomPolyMap":
        """c·z^m e_s con s en 0..n−1."""
        m = tuple(int(x) for x in m)
        if len(m) != n or not 0 <= s < n:
            raise DimensionMismatch(f"monomio {m}, componente {s} fuera de C^{n}")
        k = sum(m)
        coeffs = np.zeros((len(monomials(n, k)), n), dtype=complex)
        coeffs[_indice(n, k)[m], s] = c
        return cls(n, k, coeffs)

    @classmethod
    def from_vector(cls, n: int, k: int, vector: np.ndarray) -> "HomPolyMap":
        vector = np.asarray(vector, dtype=complex)
        if vector.size != space_dim(n, k):
            raise DimensionMismatch(f"vector de tamaño {vector.size} ≠ dim P^{k}(C^{n}) = {space_dim(n, k)}")
        return cls(n, k, vector.reshape(-1, n))

    @classmethod
    def linear(cls, matriz: Any) -> "HomPolyMap":
        """La aplicación lineal z ↦ Mz como elemento de P^1."""
        M = np.asarray(matriz, dtype=complex)
        n = M.shape[0]
        # monomios de grado 1: e_1, e_2, … en ese orden
        return cls(n, 1, M.T.copy())

    @classmethod
    def identity(cls, n: int) -> "HomPolyMap":
        return cls.linear(np.eye(n))

    # ── acceso ───────────────────────────────────────────────────────────────
    @property
    def vector(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def coefficient(self, m: Sequence[int], s: int) -> complex:
        return complex(self.coeffs[_indice(self.n, self.k)[tuple(m)], s])

    def terms(self) -> List[Tuple[MultiIndex, int, complex]]:
        """Términos no nulos (m, s, c) con s en 0..n−1."""
        mons = monomials(self.n, self.k)
        filas, cols = np.nonzero(self.coeffs)
        return [(mons[i], int(s), complex(self.coeffs[i, s])) for i, s in zip(filas, cols)]

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    # ── aritmética ───────────────────────────────────────────────────────────
    def _compatible(self, otro: "HomPolyMap") -> None:
        if (self.n, self.k) != (otro.n, otro.k):
            raise DimensionMismatch(f"P^{self.k}(C^{self.n}) frente a P^{otro.k}(C^{otro.n})")

    def __add__(self, otro: "HomPolyMap") -> "HomPolyMap":
        self._compatible(otro)
        return HomPolyMap(self.n, self.k, self.coeffs + otro.coeffs)

    def __sub__(self, otro: "HomPolyMap") -> "HomPolyMap":
        self._compatible(otro)
        return HomPolyMap(self.n, self.k, self.coeffs - otro.coeffs)

    def __neg__(self) -> "HomPolyMap":
        return HomPolyMap(self.n, self.k, -self.coeffs)

    def __mul__(self, c: complex) -> "HomPolyMap":
        return HomPolyMap(self.n, self.k, self.coeffs * c)

    __rmul__ = __mul__

    def apply_matrix(self, M: np.ndarray) -> "HomPolyMap":
        """Q ↦ el polinomio con vector de coeficientes M·vec(Q)."""
        return HomPolyMap.from_vector(self.n, self.k, np.asarray(M) @ self.vector)

    # ── evaluación ───────────────────────────────────────────────────────────
    def _puntos(self, z: Any) -> Tuple[np.ndarray, bool]:
        Z = np.asarray(z, dtype=complex)
        if Z.shape[-1] != self.n or Z.ndim > 2:
            raise DimensionMismatch(f"punto de forma {Z.shape} para P^{self.k}(C^{self.n})")
        return np.atleast_2d(Z), Z.ndim == 1

    def __call__(self, z: Any) -> np.ndarray:
        return self.evaluate(z)

    def evaluate(self, z: Any) -> np.ndarray:
        Z, unico = self._puntos(z)
        salida = _potencias(Z, _exponentes(self.n, self.k)) @ self.coeffs
        return salida[0] if unico else salida

    def jacobian(self, z: Any) -> np.ndarray:
        """DQ(z) como matriz (n, n) o lote (N, n, n)."""
        Z, unico = self._puntos(z)
        E = _exponentes(self.n, self.k)
        J = np.zeros((Z.shape[0], self.n, self.n), dtype=complex)
        for i in range(self.n):
            activos = E[:, i] > 0
            if not activos.any():
                continue
            Ei = E[activos].copy()
            Ei[:, i] -= 1
            derivada = _potencias(Z, Ei) * E[activos, i][None, :]
            J[:, :, i] = derivada @ self.coeffs[activos]
        return J[0] if unico else J

    def jacobian_apply(self, z: Any, w: Any) -> np.ndarray:
        """DQ(z)·w = k·Q(w, z^{k−1})."""
        W, _ = self._puntos(w)
        J = self.jacobian(z)
        if J.ndim == 2:
            return J @ np.asarray(w, dtype=complex)
        return np.einsum("nij,nj->ni", J, W)

    # ── JSON ─────────────────────────────────────────────────────────────────
    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "terms": [{"m": list(m), "s": s + 1, "re": c.real, "im": c.imag}
                      for m, s, c in self.terms()],
        }

    @classmethod
    def from_json(cls, datos: Any, campo: str = "Q") -> "HomPolyMap":
        n = exigir(datos, "n", int, campo)
        k = exigir(datos, "k", int, campo)
        if n < 1 or k < 1:
            raise SchemaError("n y k deben ser ≥ 1", campo=campo)
        coeffs = np.zeros((len(monomials(n, k)), n), dtype=complex)
        for i, termino in enumerate(exigir(datos, "terms", list, campo)):
            ruta = f"{campo}.terms[{i}]"
            m = exigir(termino, "m", list, ruta)
            if len(m) != n or any(not isinstance(x, int) or x < 0 for x in m) or sum(m) != k:
                raise SchemaError(f"multi-índice inválido para grado {k}", campo=f"{ruta}.m")
            s = exigir(termino, "s", int, ruta)
            if not 1 <= s <= n:
                raise SchemaError("componente fuera de 1..n", campo=f"{ruta}.s")
            re = exigir(termino, "re", float, ruta)
            im = termino.get("im", 0.0)
            coeffs[_indice(n, k)[tuple(m)], s - 1] += complex(re, float(im))
        return cls(n, k, coeffs)

    def __repr__(self) -> str:
        return f"HomPolyMap(n={self.n}, k={self.k}, terms={len(self.terms())})"


# ──────────────────────────────────────────────────────────────────────────────
# OPERACIONES
# ──────────────────────────────────────────────────────────────────────────────

def evaluate(Q: HomPolyMap, z: Any) -> np.ndarray:
    return Q.evaluate(z)


def jacobian_apply(Q: HomPolyMap, z: Any, w: Any) -> np.ndarray:
    return Q.jacobian_apply(z, w)


def poly_norm(Q: HomPolyMap) -> float:
    """
    Cota superior de sup ‖Q(w₁,…,w_k)‖ sobre ‖wᵢ‖ ≤ 1: la suma de los módulos
    de los coeficientes. No es la norma exacta.
    """
    return float(np.abs(Q.coeffs).sum())


def compose_jacobian(F: HomPolyMap, W: HomPolyMap) -> HomPolyMap:
    """
    El polinomio z ↦ DF(z)·W(z), de grado deg F − 1 + deg W, por convolución
    exacta de coeficientes.
    """
    if F.n != W.n:
        raise DimensionMismatch(f"dimensiones {F.n} y {W.n}")
    n = F.n
    grado = F.k - 1 + W.k
    destino = _indice(n, grado)
    salida = np.zeros((len(monomials(n, grado)), n), dtype=complex)
    mons_W = monomials(n, W.k)

    for m, s, c in F.terms():
        for i in range(n):
            if m[i] == 0:
                continue
            base = list(m)
            base[i] -= 1
            factor = m[i] * c
            for p_idx, p in enumerate(mons_W):
                w = W.coeffs[p_idx, i]
                if w == 0:
                    continue
                salida[destino[tuple(b + q for b, q in zip(base, p))], s] += factor * w
    return HomPolyMap(n, grado, salida)


def _bk_directo(A: np.ndarray, k: int) -> np.ndarray:
    n = A.shape[0]
    idx = _indice(n, k)
    mons = monomials(n, k)
    B = np.zeros((len(mons) * n, len(mons) * n), dtype=complex)
    for col_m, m in enumerate(mons):
        for s in range(n):
            col = col_m * n + s
            # DQ(z)·Az con Q = z^m e_s: Σ_i m_i z^{m−e_i} Σ_j A_ij z_j
            for i in range(n):
                if m[i] == 0:
                    continue
                for j in range(n):
                    if A[i, j] == 0:
                        continue
                    destino = list(m)
                    destino[i] -= 1
                    destino[j] += 1
                    B[idx[tuple(destino)] * n + s, col] += m[i] * A[i, j]
            # − A·Q(z)
            B[col_m * n:(col_m + 1) * n, col] -= A[:, s]
    return B


@lru_cache(maxsize=64)
def _bk_cacheado(crudo: bytes, n: int, k: int) -> np.ndarray:
    A = np.frombuffer(crudo, dtype=complex).reshape(n, n)
    B = _bk_directo(A, k)
    B.setflags(write=False)
    return B


def build_Bk(A: OperatorA, k: int) -> np.ndarray:
    """Matriz de Q ↦ DQ(z)(Az) − A·Q(z) sobre P^k(C^n) en la base de monomios."""
    if k < 2:
        raise ParameterOutOfRange(f"B_k se define para k ≥ 2 (k = {k})")
    M = np.ascontiguousarray(A.entries, dtype=complex)
    return _bk_cacheado(M.tobytes(), A.n, k)


def bk_formula_eigenvalues(lam: Sequence[complex], k: int) -> np.ndarray:
    """⟨m, λ⟩ − λ_s en el orden de la base (m, s)."""
    lam = np.asarray(lam, dtype=complex)
    n = lam.size
    E = _exponentes(n, k)
    return ((E @ lam)[:, None] - lam[None, :]).reshape(-1)


def _producto_formas(Pinv: np.ndarray, m: MultiIndex) -> Dict[MultiIndex, complex]:
    # Expande Π_i (Σ_j Pinv[i,j] z_j)^{m_i} como polinomio escalar
    n = len(m)
    poli: Dict[MultiIndex, complex] = {(0,) * n: 1.0 + 0j}
    for i, potencia in enumerate(m):
        for _ in range(potencia):
            nuevo: Dict[MultiIndex, complex] = {}
            for exp, c in poli.items():
                for j in range(n):
                    if Pinv[i, j] == 0:
                        continue
                    e = list(exp)
                    e[j] += 1
                    e = tuple(e)
                    nuevo[e] = nuevo.get(e, 0) + c * Pinv[i, j]
            poli = nuevo
    return poli


def bk_eigenbasis(A: OperatorA, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Autovalores ⟨m,λ⟩ − λ_s y autovectores de B_k (columnas, orden (m, s)).

    Con A = PΛP⁻¹, el autovector de índice (m, s) es z ↦ P e_s (P⁻¹z)^m.
    Si A es diagonal la matriz de autovectores es la identidad.
    """
    n = A.n
    valores = bk_formula_eigenvalues(A.eigenvalues, k)
    if A.is_diagonal:
        return valores, np.eye(space_dim(n, k), dtype=complex)

    P = A.eigenvectors
    Pinv = np.linalg.inv(P)
    idx = _indice(n, k)
    V = np.zeros((space_dim(n, k), space_dim(n, k)), dtype=complex)
    for col_m, m in enumerate(monomials(n, k)):
        escalar = _producto_formas(Pinv, m)
        for s in range(n):
            col = col_m * n + s
            for exp, c in escalar.items():
                V[idx[exp] * n:(idx[exp] + 1) * n, col] += c * P[:, s]
    return valores, V


def exp_identities_check(A: OperatorA, Q: HomPolyMap, z: Any, t: float,
                         tol: float = 1e-7) -> Dict[str, Any]:
    """
    Residuos de las identidades
      e^{tA}(e^{tB_k}Q)((e^{−tA}z)^k) = Q(z^k)
      e^{tA}Q((e^{−tA}z)^k)          = (e^{−tB_k}Q)(z^k)
      e^{tA}(e^{tB_k}Q)(z^k)         = Q((e^{tA}z)^k)
    """
    z = np.asarray(z, dtype=complex)
    B = build_Bk(A, Q.k)
    eB, eBm = matrix_exp(B, t), matrix_exp(B, -t)
    eA, eAm = A.exp(t), A.exp(-t)
    QeB, QeBm = Q.apply_matrix(eB), Q.apply_matrix(eBm)

    lados = {
        "AB_A": (eA @ QeB(eAm @ z), Q(z)),
        "A_A":  (eA @ Q(eAm @ z), QeBm(z)),
        "AB":   (eA @ QeB(z), Q(eA @ z)),
    }
    residuos = {
        clave: float(np.linalg.norm(izq - der)) / (1.0 + float(np.linalg.norm(der)))
        for clave, (izq, der) in lados.items()
    }
    return {"status": "ok", "t": float(t), "residuals": residuos,
            "passed": max(residuos.values()) <= tol}


def resonant_labels(lam: Sequence[complex], k: int, solo_real: bool = False,
                    tol: float = Config.TOL_RESONANCIA) -> List[Tuple[MultiIndex, int]]:
    """(m, s) con ⟨m,λ⟩ − λ_s = 0 (o solo su parte real), s en 1..n."""
    valores = bk_formula_eigenvalues(lam, k)
    medida = np.abs(valores.real) if solo_real else np.abs(valores)
    etiquetas = basis_labels(len(lam), k)
    return [etiquetas[i] for i in np.flatnonzero(medida <= tol)]
