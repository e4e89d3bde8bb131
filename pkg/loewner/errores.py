# ==============================================================================
# errores.py
# Jerarquía de excepciones y avisos de la librería.
#
# Las comprobaciones matemáticas (desigualdades, residuos, decaimientos) NO
# lanzan excepciones: devuelven informes con `passed`. Las excepciones quedan
# para entradas inválidas, hipótesis violadas y fallos numéricos.
# ==============================================================================

from __future__ import annotations

from typing import Any, Dict, List, Optional, Sequence, Tuple


class LoewnerError(Exception):
    """Base de todos los errores del paquete."""

    def __init__(self, mensaje: str, **contexto: Any):
        super().__init__(mensaje)
        self.contexto: Dict[str, Any] = contexto


class LoewnerWarning(UserWarning):
    """Base de todos los avisos del paquete."""


# ── linalg_spectral ───────────────────────────────────────────────────────────
class NotAccretive(LoewnerError):
    def __init__(self, m: float):
        super().__init__(f"m(A) = {m:.6g} ≤ 0: A no cumple Re⟨Az,z⟩ > 0", m=m)
        self.m = m


class NotDiagonalizable(LoewnerError):
    def __init__(self, cond: float):
        super().__init__(f"matriz de autovectores mal condicionada (cond = {cond:.3g})", cond=cond)
        self.cond = cond


class ZeroBoundaryAmbiguous(LoewnerError):
    def __init__(self, autovalores: Sequence[complex], esperados: int):
        super().__init__(
            f"{len(autovalores)} autovalores con |Re| bajo el umbral pero "
            f"{esperados} resonancias exactas",
            autovalores=list(autovalores), esperados=esperados,
        )


class IllConditioned(LoewnerWarning):
    pass


# ── polyspace ─────────────────────────────────────────────────────────────────
class DimensionMismatch(LoewnerError):
    pass


# ── generators ────────────────────────────────────────────────────────────────
class GeneratorInvalid(LoewnerError):
    def __init__(self, mensaje: str, testigo: Optional[Tuple[Any, float]] = None,
                 informe: Optional[dict] = None):
        super().__init__(mensaje, testigo=testigo, informe=informe)
        self.testigo = testigo
        self.informe = informe


class ParameterOutOfRange(LoewnerError):
    pass


# ── transition / ode ──────────────────────────────────────────────────────────
class BallExit(LoewnerError):
    def __init__(self, t: float, norma: float):
        super().__init__(f"‖v‖ = {norma:.15f} alcanzó la frontera en t = {t:.6g}", t=t, norma=norma)
        self.t = t
        self.norma = norma


class StepFloor(LoewnerError):
    def __init__(self, t: float, paso: float):
        super().__init__(f"paso {paso:.3g} bajo el mínimo en t = {t:.6g}", t=t, paso=paso)
        self.t = t
        self.paso = paso


class InsufficientTail(LoewnerError):
    pass


# ── coefficients ──────────────────────────────────────────────────────────────
class MissingLowerOrder(LoewnerError):
    def __init__(self, k: int, faltantes: List[int]):
        super().__init__(f"N_{k} necesita F_j para j = {faltantes}", k=k, faltantes=faltantes)
        self.faltantes = faltantes


class ResonantUnbounded(LoewnerWarning):
    pass


class ProjectedInitialDatum(LoewnerWarning):
    pass


# ── chains ────────────────────────────────────────────────────────────────────
class NoConvergence(LoewnerError):
    def __init__(self, t_max: float, incremento: float, parcial: Any = None):
        super().__init__(
            f"sin convergencia hasta T_max = {t_max:.6g} (último incremento {incremento:.3g})",
            t_max=t_max, incremento=incremento,
        )
        self.t_max = t_max
        self.incremento = incremento
        self.parcial = parcial


class PreconditionViolated(LoewnerError):
    pass


# ── spirallike ────────────────────────────────────────────────────────────────
class Resonant(LoewnerError):
    def __init__(self, k: int, testigos: List[Tuple[Tuple[int, ...], int]], mensaje: str = ""):
        super().__init__(mensaje or f"B_{k} singular: resonancias {testigos}", k=k, testigos=testigos)
        self.k = k
        self.testigos = testigos


class NoHolomorphicSolution(Resonant):
    def __init__(self, k: int, testigos: List[Tuple[Tuple[int, ...], int]], residuo: float):
        super().__init__(
            k, testigos,
            f"N_{k} ∉ rango(B_{k}) (residuo {residuo:.3g}): Df·h = Af no tiene solución holomorfa",
        )
        self.residuo = residuo


class NewtonDiverged(LoewnerError):
    pass


class BranchFailure(LoewnerError):
    pass


class NotResonant(LoewnerError):
    pass


# ── serializacion / cli ───────────────────────────────────────────────────────
class SchemaError(LoewnerError):
    def __init__(self, mensaje: str, campo: str = "", linea: Optional[int] = None,
                 columna: Optional[int] = None):
        donde = campo or "(raíz)"
        if linea is not None:
            donde += f" [línea {linea}, columna {columna}]"
        super().__init__(f"{donde}: {mensaje}", campo=campo, linea=linea, columna=columna)
        self.campo = campo
