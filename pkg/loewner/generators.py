# ==============================================================================
# generators.py
# Generadores infinitesimales h ∈ H_A(B^n) y su validación.
#
# Tres formas concretas:
#   PolynomialAutonomous     h(z)   = Az + Σ H_k(z^k)
#   PolynomialTimeDependent  h(z,t) = Az + Σ_k Σ_i a_i(t) Q_i(z^k)
#   Pushforward              h(z,t) = [Df(z)]⁻¹ Q(f(z), t)
#
# Las funciones de tiempo a(t) son objetos con nombre (constant, exp_decay,
# window, oscillation, table) para poder serializarlas; la API acepta además
# funciones arbitrarias vía TimeFunction.custom (no desde la CLI).
# ==============================================================================

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .errores import DimensionMismatch, GeneratorInvalid, ParameterOutOfRange, SchemaError
from .linalg_spectral import OperatorA, analyze
from .muestreo import esfera_sobol
from .polyspace import HomPolyMap
from .serializacion import (
    complejo_desde_json, exigir, huella, matriz_a_json, matriz_desde_json, opcional,
)

log = logging.getLogger(__name__)


# ──────────────────────────────────────────────────────────────────────────────
# FUNCIONES DE TIEMPO
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class TimeFunction:
    kind:   str
    params: Dict[str, Any] = field(default_factory=dict)
    fn:     Optional[Callable[[np.ndarray], np.ndarray]] = None

    # ── constructores ────────────────────────────────────────────────────────
    @classmethod
    def constant(cls, c: complex = 1.0) -> "TimeFunction":
        return cls("constant", {"c": complex(c)})

    @classmethod
    def exp_decay(cls, rate: float, amplitude: complex = 1.0) -> "TimeFunction":
        return cls("exp_decay", {"rate": float(rate), "amplitude": complex(amplitude)})

    @classmethod
    def window(cls, T: float, amplitude: complex = 1.0) -> "TimeFunction":
        return cls("window", {"T": float(T), "amplitude": complex(amplitude)})

    @classmethod
    def oscillation(cls, freq: float, amplitude: complex = 1.0) -> "TimeFunction":
        return cls("oscillation", {"freq": float(freq), "amplitude": complex(amplitude)})

    @classmethod
    def table(cls, times: Sequence[float], values: Sequence[complex]) -> "TimeFunction":
        tiempos = np.asarray(times, dtype=float)
        if tiempos.size == 0 or tiempos.size != len(values) or np.any(np.diff(tiempos) <= 0):
            raise ParameterOutOfRange("tabla: tiempos estrictamente crecientes y del mismo tamaño que los valores")
        return cls("table", {"times": tuple(tiempos.tolist()),
                             "values": tuple(complex(v) for v in values)})

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], np.ndarray], bound: float,
               breakpoints: Sequence[float] = ()) -> "TimeFunction":
        return cls("custom", {"bound": float(bound), "breakpoints": tuple(breakpoints)}, fn)

    # ── evaluación ───────────────────────────────────────────────────────────
    def __call__(self, t: Any) -> Any:
        t_arr = np.asarray(t, dtype=float)
        p = self.params
        if self.kind == "constant":
            valor = np.full(t_arr.shape, p["c"], dtype=complex)
        elif self.kind == "exp_decay":
            valor = p["amplitude"] * np.exp(-p["rate"] * t_arr)
        elif self.kind == "window":
            valor = np.where((t_arr >= 0) & (t_arr <= p["T"]), p["amplitude"], 0.0).astype(complex)
        elif self.kind == "oscillation":
            valor = p["amplitude"] * np.exp(1j * p["freq"] * t_arr)
        elif self.kind == "table":
            x = np.asarray(p["times"])
            v = np.asarray(p["values"])
            valor = np.interp(t_arr, x, v.real) + 1j * np.interp(t_arr, x, v.imag)
        else:
            valor = np.asarray(self.fn(t_arr), dtype=complex)
        return complex(valor) if np.ndim(t) == 0 else valor

    @property
    def bound(self) -> float:
        """sup_t |a(t)| sobre t ≥ 0."""
        p = self.params
        if self.kind == "constant":
            return abs(p["c"])
        if self.kind == "exp_decay":
            return abs(p["amplitude"]) * (1.0 if p["rate"] >= 0 else np.inf)
        if self.kind in ("window", "oscillation"):
            return abs(p["amplitude"])
        if self.kind == "table":
            return float(max(abs(v) for v in p["values"]))
        return p["bound"]

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        if self.kind == "window":
            return (self.params["T"],)
        if self.kind in ("table", "custom"):
            return tuple(self.params.get("times", self.params.get("breakpoints", ())))
        return ()

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    # ── JSON ─────────────────────────────────────────────────────────────────
    def to_json(self) -> Dict[str, Any]:
        if self.kind == "custom":
            raise SchemaError("una función de tiempo arbitraria no es serializable", campo="a")
        salida: Dict[str, Any] = {"kind": self.kind}
        for clave, valor in self.params.items():
            salida[clave] = list(valor) if isinstance(valor, tuple) else valor
        return salida

    @classmethod
    def from_json(cls, datos: Any, campo: str = "a") -> "TimeFunction":
        tipo = exigir(datos, "kind", str, campo)
        amp = complejo_desde_json(datos.get("amplitude", 1.0), f"{campo}.amplitude")
        if tipo == "constant":
            return cls.constant(complejo_desde_json(datos.get("c", 1.0), f"{campo}.c"))
        if tipo == "exp_decay":
            return cls.exp_decay(exigir(datos, "rate", float, campo), amp)
        if tipo == "window":
            return cls.window(exigir(datos, "T", float, campo), amp)
        if tipo == "oscillation":
            return cls.oscillation(exigir(datos, "freq", float, campo), amp)
        if tipo == "table":
            tiempos = exigir(datos, "times", list, campo)
            valores = [complejo_desde_json(v, f"{campo}.values[{i}]")
                       for i, v in enumerate(exigir(datos, "values", list, campo))]
            try:
                return cls.table(tiempos, valores)
            except ParameterOutOfRange as e:
                raise SchemaError(str(e), campo=campo) from e
        raise SchemaError(f"tipo de función de tiempo desconocido '{tipo}'", campo=f"{campo}.kind")


def _como_tiempo(a: Any) -> TimeFunction:
    if isinstance(a, TimeFunction):
        return a
    if callable(a):
        raise ParameterOutOfRange("usa TimeFunction.custom(fn, bound) para funciones arbitrarias")
    return TimeFunction.constant(complex(a))


# ──────────────────────────────────────────────────────────────────────────────
# GENERATOR SPEC
# ──────────────────────────────────────────────────────────────────────────────

class GeneratorSpec(ABC):
    """h(z, t) con h(0,t) = 0 y Dh(0,t) = A."""

    form: str = ""

    def __init__(self, A: OperatorA, nombre: str = ""):
        self.A = A
        self.n = A.n
        self.nombre = nombre or self.form

    @abstractmethod
    def __call__(self, z: Any, t: float = 0.0) -> np.ndarray:
        ...

    @property
    def is_autonomous(self) -> bool:
        return True

    @property
    def is_polynomial(self) -> bool:
        return False

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return ()

    def degrees(self) -> List[int]:
        return []

    def H_k(self, k: int, t: float = 0.0) -> HomPolyMap:
        raise GeneratorInvalid(f"{self.form}: sin parte polinomial explícita")

    def H_is_constant(self, k: int) -> bool:
        return self.is_autonomous

    @abstractmethod
    def to_json(self) -> Dict[str, Any]:
        ...

    def hash(self) -> str:
        try:
            return huella(self.to_json())
        except SchemaError:
            return "no-serializable"

    def _lote(self, z: Any) -> Tuple[np.ndarray, bool]:
        Z = np.asarray(z, dtype=complex)
        if Z.shape[-1] != self.n:
            raise DimensionMismatch(f"punto de dimensión {Z.shape[-1]} para un generador en C^{self.n}")
        return np.atleast_2d(Z), Z.ndim == 1

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, nombre='{self.nombre}')"


class PolynomialAutonomous(GeneratorSpec):
    form = "polynomial_autonomous"

    def __init__(self, A: OperatorA, H: Optional[Dict[int, HomPolyMap]] = None, nombre: str = ""):
        super().__init__(A, nombre)
        self.H: Dict[int, HomPolyMap] = {}
        for k, Q in sorted((H or {}).items()):
            if Q.n != self.n or Q.k != k or k < 2:
                raise DimensionMismatch(f"H_{k} debe estar en P^{k}(C^{self.n}) con k ≥ 2")
            self.H[k] = Q

    @property
    def is_polynomial(self) -> bool:
        return True

    def degrees(self) -> List[int]:
        return sorted(self.H)

    def H_k(self, k: int, t: float = 0.0) -> HomPolyMap:
        return self.H.get(k, HomPolyMap.zeros(self.n, k))

    def __call__(self, z: Any, t: float = 0.0) -> np.ndarray:
        Z, unico = self._lote(z)
        salida = Z @ self.A.entries.T
        for Q in self.H.values():
            salida = salida + Q.evaluate(Z)
        return salida[0] if unico else salida

    def to_json(self) -> Dict[str, Any]:
        return {"form": self.form, "A": matriz_a_json(self.A.entries),
                "H": [Q.to_json() for Q in self.H.values()]}


class PolynomialTimeDependent(GeneratorSpec):
    form = "polynomial_time_dependent"

    def __init__(self, A: OperatorA, terms: Sequence[Tuple[Any, HomPolyMap]], nombre: str = ""):
        super().__init__(A, nombre)
        self.terms: List[Tuple[TimeFunction, HomPolyMap]] = []
        for a, Q in terms:
            if Q.n != self.n or Q.k < 2:
                raise DimensionMismatch(f"término de grado {Q.k} en C^{Q.n} inválido")
            self.terms.append((_como_tiempo(a), Q))

    @property
    def is_autonomous(self) -> bool:
        return all(a.is_constant for a, _ in self.terms)

    @property
    def is_polynomial(self) -> bool:
        return True

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(sorted({b for a, _ in self.terms for b in a.breakpoints}))

    def degrees(self) -> List[int]:
        return sorted({Q.k for _, Q in self.terms})

    def H_k(self, k: int, t: float = 0.0) -> HomPolyMap:
        salida = HomPolyMap.zeros(self.n, k)
        for a, Q in self.terms:
            if Q.k == k:
                salida = salida + Q * a(float(t))
        return salida

    def H_is_constant(self, k: int) -> bool:
        return all(a.is_constant for a, Q in self.terms if Q.k == k)

    def __call__(self, z: Any, t: float = 0.0) -> np.ndarray:
        Z, unico = self._lote(z)
        salida = Z @ self.A.entries.T
        for a, Q in self.terms:
            salida = salida + a(float(t)) * Q.evaluate(Z)
        return salida[0] if unico else salida

    def to_json(self) -> Dict[str, Any]:
        return {"form": self.form, "A": matriz_a_json(self.A.entries),
                "terms": [{"a": a.to_json(), "Q": Q.to_json()} for a, Q in self.terms]}


class Pushforward(GeneratorSpec):
    """
    h(z,t) = [Df(z)]⁻¹ Q(f(z), t). Df(z) se invierte por resolución densa en
    cada punto; un Jacobiano singular es un error, no se regulariza.
    """
    form = "pushforward"

    def __init__(self, A: OperatorA, mapa: Callable, jacobiano: Callable,
                 campo: Optional[Callable[[np.ndarray, float], np.ndarray]] = None,
                 nombre: str = "", meta: Optional[Dict[str, Any]] = None,
                 autonomo: bool = True):
        super().__init__(A, nombre)
        self.mapa = mapa
        self.jacobiano = jacobiano
        # Por defecto Q(w) = Aw: el generador del mapa espiral f
        self.campo = campo or (lambda W, t: W @ self.A.entries.T)
        self.meta = dict(meta or {})
        self._autonomo = autonomo

    @property
    def is_autonomous(self) -> bool:
        return self._autonomo

    def __call__(self, z: Any, t: float = 0.0) -> np.ndarray:
        Z, unico = self._lote(z)
        W = np.atleast_2d(self.mapa(Z))
        rhs = np.atleast_2d(self.campo(W, float(t)))
        J = np.asarray(self.jacobiano(Z), dtype=complex).reshape(Z.shape[0], self.n, self.n)
        try:
            salida = np.linalg.solve(J, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError as e:
            raise GeneratorInvalid(f"{self.nombre}: Df(z) singular") from e
        return salida[0] if unico else salida

    def to_json(self) -> Dict[str, Any]:
        if not self.meta:
            raise SchemaError("generador push-forward sin descripción serializable", campo="form")
        return {"form": self.meta.get("form", self.form), **{k: v for k, v in self.meta.items() if k != "form"}}


# ──────────────────────────────────────────────────────────────────────────────
# VALIDATE
# ──────────────────────────────────────────────────────────────────────────────

def _jacobiano_dif(h: GeneratorSpec, t: float, paso: float = Config.PASO_DIF_FINITA) -> np.ndarray:
    n = h.n
    E = np.eye(n, dtype=complex) * paso
    mas = np.atleast_2d(h(E, t))
    menos = np.atleast_2d(h(-E, t))
    return ((mas - menos) / (2 * paso)).T


def validate(h: GeneratorSpec, radii: Sequence[float] = (0.3, 0.6, 0.9),
             samples_per_sphere: int = 1000, t_grid: Sequence[float] = (0.0,),
             seed: int = Config.SEMILLA_DEFECTO, strict: bool = True) -> Dict[str, Any]:
    """
    Muestreo de Re⟨h(z,t), z⟩ sobre esferas y comprobación de h(0,t) = 0 y
    Dh(0,t) = A por diferencias centradas.

    Parámetros
    ----------
    strict : si True, una violación (< −1e-12) lanza GeneratorInvalid con el
             punto testigo; si False solo se reporta.
    """
    if not radii or any(not 0 < r < 1 for r in radii) or samples_per_sphere < 1:
        raise ParameterOutOfRange("radios en (0,1) y al menos una muestra por esfera")

    filas: List[Dict[str, Any]] = []
    minimo, testigo = np.inf, None
    for i, r in enumerate(radii):
        Z = esfera_sobol(h.n, float(r), samples_per_sphere, seed + i)
        for t in t_grid:
            valores = np.real(np.sum(np.atleast_2d(h(Z, float(t))) * Z.conj(), axis=1))
            j = int(np.argmin(valores))
            filas.append({"r": float(r), "t": float(t), "min": float(valores[j]),
                          "min_over_r2": float(valores[j]) / r ** 2})
            if valores[j] < minimo:
                minimo, testigo = float(valores[j]), (Z[j].copy(), float(t))

    err_origen = max(float(np.linalg.norm(h(np.zeros(h.n), float(t)))) for t in t_grid)
    err_jac = max(float(np.linalg.norm(_jacobiano_dif(h, float(t)) - h.A.entries, 2)) for t in t_grid)
    violacion = minimo < -Config.TOL_VIOLACION
    jac_ok = err_origen <= Config.TOL_JACOBIANO_0 and err_jac <= Config.TOL_JACOBIANO_0

    informe = {
        "status": "ok",
        "generator": h.nombre,
        "rows": filas,
        "min_real_part": minimo,
        "witness": {"z": testigo[0], "t": testigo[1]} if testigo else None,
        "h0_error": err_origen,
        "jacobian_error": err_jac,
        "violation": violacion,
        "passed": (not violacion) and jac_ok,
    }
    if violacion:
        log.warning(f"⚠️  validate: Re⟨h,z⟩ = {minimo:.3e} < 0 en z={testigo[0]}, t={testigo[1]}")
        if strict:
            raise GeneratorInvalid(
                f"Re⟨h(z,t), z⟩ = {minimo:.6g} < 0", testigo=(testigo[0], testigo[1]), informe=informe,
            )
    elif not jac_ok:
        log.warning(f"⚠️  validate: h(0)={err_origen:.2e}, ‖Dh(0) − A‖={err_jac:.2e}")
    else:
        log.debug(f"validate: {h.nombre} válido (min Re⟨h,z⟩ = {minimo:.4g})")
    return informe


# ──────────────────────────────────────────────────────────────────────────────
# GENERADORES CONCRETOS
# ──────────────────────────────────────────────────────────────────────────────

def example_generator(lam: complex, a: Any = 1.0) -> PolynomialTimeDependent:
    """h(z,t) = (λz₁ + a(t)z₂², z₂) sobre A = diag(λ, 1)."""
    lam = complex(lam)
    a = _como_tiempo(a)
    if lam.real < 2:
        raise ParameterOutOfRange(f"Re λ = {lam.real} < 2")
    if a.bound > 1 + 1e-15:
        raise ParameterOutOfRange(f"sup |a(t)| = {a.bound} > 1")
    A = analyze(np.diag([lam, 1.0]))
    termino = HomPolyMap.monomial(2, (0, 2), 0)
    return PolynomialTimeDependent(A, [(a, termino)], nombre=f"example(λ={lam:g}, a={a.kind})")


def monomial_remark_generator(A: OperatorA, m: Sequence[int], s: int, a: complex) -> Dict[str, Any]:
    """
    h(z) = Az + a(λ_s − ⟨m,λ⟩) z^m e_s, generador del mapa espiral
    f(z) = z + a z^m e_s. Requiere A diagonal y m_i = 0 para i ≤ s (s en 0..n−1).
    """
    if not A.is_diagonal:
        raise ParameterOutOfRange("A debe ser diagonal")
    m = tuple(int(x) for x in m)
    if len(m) != A.n or sum(m) < 2 or not 0 <= s < A.n - 1 or any(m[i] for i in range(s + 1)):
        raise ParameterOutOfRange(f"multi-índice {m} con s={s}: se necesita m_i = 0 para i ≤ s y |m| ≥ 2")
    lam = A.eigenvalues
    defecto = complex(lam[s] - np.dot(m, lam))
    H = HomPolyMap.monomial(A.n, m, s, complex(a) * defecto)
    f_k = HomPolyMap.monomial(A.n, m, s, complex(a))
    cota = None if abs(defecto) <= Config.TOL_RESONANCIA else A.m / abs(defecto)
    return {
        "generator": PolynomialAutonomous(A, {H.k: H}, nombre=f"monomial(m={m}, s={s + 1})"),
        "map_term": f_k,
        "defect": defecto,
        "admissible_bound": cota,
        "admissible": cota is None or abs(complex(a)) <= cota + 1e-15,
    }


# ── Roper–Suffridge ───────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class OneVariableMap:
    """f analítica en el disco con f(0) = 0, f'(0) = 1, y sus logaritmos."""
    name:      str
    f:         Callable[[np.ndarray], np.ndarray]
    df:        Callable[[np.ndarray], np.ndarray]
    d2f:       Callable[[np.ndarray], np.ndarray]
    log_ratio: Callable[[np.ndarray], np.ndarray]     # log(f(z)/z), rama con valor 0 en z = 0
    log_df:    Callable[[np.ndarray], np.ndarray]     # log f'(z), rama con valor 0 en z = 0

    @classmethod
    def custom(cls, f: Callable, df: Callable, d2f: Callable, name: str = "custom") -> "OneVariableMap":
        """Ramas principales de log(f/z) y log f' (continuas si Re(f/z), Re f' > 0)."""
        def cociente(z):
            z = np.asarray(z, dtype=complex)
            seguro = np.where(z == 0, 1.0, z)
            return np.where(z == 0, 1.0 + 0j, f(seguro) / seguro)
        return cls(name, f, df, d2f, lambda z: np.log(cociente(z)), lambda z: np.log(df(z)))


def _log1m(z):
    return np.log(1 - np.asarray(z, dtype=complex))


STARLIKE_BUILTINS: Dict[str, OneVariableMap] = {
    "koebe": OneVariableMap(
        "koebe",
        f=lambda z: z / (1 - z) ** 2,
        df=lambda z: (1 + z) / (1 - z) ** 3,
        d2f=lambda z: (4 + 2 * z) / (1 - z) ** 4,
        log_ratio=lambda z: -2 * _log1m(z),
        log_df=lambda z: np.log(1 + np.asarray(z, dtype=complex)) - 3 * _log1m(z),
    ),
    "identity": OneVariableMap(
        "identity",
        f=lambda z: np.asarray(z, dtype=complex),
        df=lambda z: np.ones_like(np.asarray(z, dtype=complex)),
        d2f=lambda z: np.zeros_like(np.asarray(z, dtype=complex)),
        log_ratio=lambda z: np.zeros_like(np.asarray(z, dtype=complex)),
        log_df=lambda z: np.zeros_like(np.asarray(z, dtype=complex)),
    ),
    "convex": OneVariableMap(
        "convex",
        f=lambda z: z / (1 - z),
        df=lambda z: 1 / (1 - z) ** 2,
        d2f=lambda z: 2 / (1 - z) ** 3,
        log_ratio=lambda z: -_log1m(z),
        log_df=lambda z: -2 * _log1m(z),
    ),
}


def starlike_function(f: Any) -> OneVariableMap:
    if isinstance(f, OneVariableMap):
        return f
    if isinstance(f, str) and f in STARLIKE_BUILTINS:
        return STARLIKE_BUILTINS[f]
    raise ParameterOutOfRange(f"función de una variable desconocida '{f}' (disponibles: {sorted(STARLIKE_BUILTINS)})")


class RoperSuffridgeMap:
    """Φ_{α,β}(f)(z) = (f(z₁), (f(z₁)/z₁)^α (f'(z₁))^β z₂), ramas principales."""

    def __init__(self, f1: Any, alpha: float, beta: float):
        self.f1 = starlike_function(f1)
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.n = 2

    def factor(self, z1: Any) -> np.ndarray:
        z1 = np.asarray(z1, dtype=complex)
        return np.exp(self.alpha * self.f1.log_ratio(z1) + self.beta * self.f1.log_df(z1))

    def _dlog_factor(self, z1: np.ndarray) -> np.ndarray:
        f1 = self.f1
        cerca = np.abs(z1) < 1e-7
        seguro = np.where(cerca, 0.5, z1)
        d2f0 = complex(np.asarray(f1.d2f(np.zeros(1)))[0])
        lejos = (self.alpha * (f1.df(seguro) / f1.f(seguro) - 1 / seguro)
                 + self.beta * f1.d2f(seguro) / f1.df(seguro))
        return np.where(cerca, (self.alpha / 2 + self.beta) * d2f0, lejos)

    def __call__(self, z: Any) -> np.ndarray:
        Z = np.asarray(z, dtype=complex)
        Zb = np.atleast_2d(Z)
        salida = np.stack([self.f1.f(Zb[:, 0]), self.factor(Zb[:, 0]) * Zb[:, 1]], axis=1)
        return salida[0] if Z.ndim == 1 else salida

    def jacobian(self, z: Any) -> np.ndarray:
        Z = np.asarray(z, dtype=complex)
        Zb = np.atleast_2d(Z)
        z1, z2 = Zb[:, 0], Zb[:, 1]
        g = self.factor(z1)
        J = np.zeros((Zb.shape[0], 2, 2), dtype=complex)
        J[:, 0, 0] = self.f1.df(z1)
        J[:, 1, 0] = g * self._dlog_factor(z1) * z2
        J[:, 1, 1] = g
        return J[0] if Z.ndim == 1 else J


def admissibility(lam: complex, alpha: float, beta: float) -> Dict[str, Any]:
    """
    Mínimo exacto de q(x) = (Re λ − α − β)x² − 2βx + α + β en [0,1]
    (extremos y vértice) y las hipótesis α ∈ [0, Re λ], β ∈ [0, 1/2], α+β ≤ Re λ.
    """
    a2 = complex(lam).real - alpha - beta
    q = lambda x: a2 * x * x - 2 * beta * x + alpha + beta
    candidatos = [0.0, 1.0]
    if a2 > 0 and 0 < beta / a2 < 1:
        candidatos.append(beta / a2)
    x_min = min(candidatos, key=q)
    hipotesis = (0 <= alpha <= complex(lam).real and 0 <= beta <= 0.5
                 and alpha + beta <= complex(lam).real)
    return {
        "q_min": float(q(x_min)),
        "argmin": float(x_min),
        "q_nonnegative": bool(q(x_min) >= -Config.TOL_VIOLACION),
        "parameter_ranges_ok": bool(hipotesis),
        "admissible": bool(q(x_min) >= -Config.TOL_VIOLACION and alpha >= 0 and beta >= 0),
    }


class RoperSuffridgeGenerator(Pushforward):
    form = "roper_suffridge"

    def __init__(self, A: OperatorA, mapa: RoperSuffridgeMap, admisibilidad: Dict[str, Any],
                 meta: Dict[str, Any]):
        super().__init__(A, mapa, mapa.jacobian,
                         nombre=f"roper_suffridge({mapa.f1.name}, α={mapa.alpha}, β={mapa.beta})",
                         meta=meta)
        self.map = mapa
        self.admissibility = admisibilidad


def roper_suffridge_generator(f: Any, alpha: float, beta: float, lam: complex) -> RoperSuffridgeGenerator:
    """
    Generador de Φ_{α,β}(f) sobre A = diag(1, λ): h = [DΦ]⁻¹ A Φ. La
    admisibilidad se adjunta en `meta`; parámetros no admisibles producen un
    generador marcado (validate puede entonces fallar).
    """
    lam = complex(lam)
    if lam.real < 1:
        raise ParameterOutOfRange(f"Re λ = {lam.real} < 1")
    mapa = RoperSuffridgeMap(f, alpha, beta)
    A = analyze(np.diag([1.0, lam]))
    adm = admissibility(lam, alpha, beta)
    if not adm["admissible"]:
        log.warning(f"⚠️  roper_suffridge_generator: parámetros no admisibles (q_min = {adm['q_min']:.4g})")
    meta = {"form": "roper_suffridge", "f": mapa.f1.name, "alpha": float(alpha),
            "beta": float(beta), "lambda": lam}
    return RoperSuffridgeGenerator(A, mapa, adm, meta)


def roper_suffridge_field(f: Any, alpha: float, beta: float, lam: complex, z: Any) -> np.ndarray:
    """Forma cerrada (z₁p(z₁), z₂(λ − α − β + (α+β)p(z₁) + βz₁p'(z₁))), p = f/(z f')."""
    f1 = starlike_function(f)
    Z = np.asarray(z, dtype=complex)
    Zb = np.atleast_2d(Z)
    z1, z2 = Zb[:, 0], Zb[:, 1]
    cerca = np.abs(z1) < 1e-7
    seguro = np.where(cerca, 0.5, z1)
    F, dF, d2F = f1.f(seguro), f1.df(seguro), f1.d2f(seguro)
    p = np.where(cerca, 1.0, F / (seguro * dF))
    # z p'(z) = 1 − p − z p f''/f'
    zdp = np.where(cerca, 0.0, 1 - p - seguro * p * d2F / dF)
    salida = np.stack([z1 * p, z2 * (lam - alpha - beta + (alpha + beta) * p + beta * zdp)], axis=1)
    return salida[0] if Z.ndim == 1 else salida


# ──────────────────────────────────────────────────────────────────────────────
# JSON
# ──────────────────────────────────────────────────────────────────────────────

def generator_from_json(datos: Any, campo: str = "generator") -> GeneratorSpec:
    forma = exigir(datos, "form", str, campo)
    if forma == "example":
        lam = complejo_desde_json(exigir(datos, "lambda", (int, float, dict), campo), f"{campo}.lambda")
        a = TimeFunction.from_json(datos["a"], f"{campo}.a") if "a" in datos else TimeFunction.constant(1.0)
        try:
            return example_generator(lam, a)
        except ParameterOutOfRange as e:
            raise SchemaError(str(e), campo=campo) from e
    if forma == "roper_suffridge":
        lam = complejo_desde_json(exigir(datos, "lambda", (int, float, dict), campo), f"{campo}.lambda")
        try:
            return roper_suffridge_generator(exigir(datos, "f", str, campo),
                                             exigir(datos, "alpha", float, campo),
                                             exigir(datos, "beta", float, campo), lam)
        except ParameterOutOfRange as e:
            raise SchemaError(str(e), campo=campo) from e

    A = analyze(matriz_desde_json(exigir(datos, "A", dict, campo), f"{campo}.A"))
    if forma == "polynomial_autonomous":
        H: Dict[int, HomPolyMap] = {}
        for i, q in enumerate(opcional(datos, "H", list, [], campo)):
            Q = HomPolyMap.from_json(q, f"{campo}.H[{i}]")
            if Q.n != A.n or Q.k < 2:
                raise SchemaError(f"H de grado {Q.k} en C^{Q.n} incompatible", campo=f"{campo}.H[{i}]")
            H[Q.k] = H[Q.k] + Q if Q.k in H else Q
        return PolynomialAutonomous(A, H)
    if forma == "polynomial_time_dependent":
        terminos = []
        for i, t in enumerate(exigir(datos, "terms", list, campo)):
            ruta = f"{campo}.terms[{i}]"
            Q = HomPolyMap.from_json(exigir(t, "Q", dict, ruta), f"{ruta}.Q")
            if Q.n != A.n or Q.k < 2:
                raise SchemaError(f"Q de grado {Q.k} en C^{Q.n} incompatible", campo=f"{ruta}.Q")
            terminos.append((TimeFunction.from_json(exigir(t, "a", dict, ruta), f"{ruta}.a"), Q))
        return PolynomialTimeDependent(A, terminos)
    raise SchemaError(f"forma de generador desconocida '{forma}'", campo=f"{campo}.form")
