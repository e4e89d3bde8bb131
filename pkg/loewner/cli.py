# ==============================================================================
# cli.py
# Línea de comandos (click). Cada subcomando arma un RunConfig y lo pasa a
# run(), que decide el código de salida:
#     0  todo correcto
#     2  cálculo correcto pero alguna comprobación matemática falló
#     1  error de entrada (JSON/CSV inválido, parámetros fuera de rango)
#
# --out: ruta terminada en .json/.csv → fichero; cualquier otra → carpeta.
# Sin --out el informe JSON sale por stdout.
# ==============================================================================

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import click
import numpy as np

from .chains import chain_limit, check_growth_bound, growth_profile
from .coefficients import compute_Nk, residual_check, resonance_report, solve_chain_coefficients
from .config import Config, configurar_logging
from .errores import LoewnerError, Resonant, SchemaError
from .generators import GeneratorSpec, PolynomialAutonomous, generator_from_json, validate
from .linalg_spectral import analyze, exp_norm_certificates, spectral_split
from .polyspace import HomPolyMap
from .serializacion import (
    dumps, escribir_json, exigir, leer_json, leer_puntos_csv, matriz_desde_json,
)
from .spirallike import (
    AffineSolutionSet, noncompactness_witness, roper_suffridge_extend, solve_spirallike,
    spirallike_membership, spirallike_residual,
)
from .transition import check_schwarz, check_transition_inequality, integrate_batch
from .verificacion import SUITES, run_suites

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    command: str
    inputs:  Dict[str, Optional[str]] = field(default_factory=dict)
    params:  Dict[str, Any] = field(default_factory=dict)
    tol:     float = 1e-8
    eps:     float = Config.EPS_CRECIMIENTO
    out:     Optional[str] = None
    seed:    int = Config.SEMILLA_DEFECTO


Informe = Tuple[Dict[str, Any], bool]


# ──────────────────────────────────────────────────────────────────────────────
# ENTRADAS
# ──────────────────────────────────────────────────────────────────────────────

_DIAG = re.compile(r"^\s*diag\((.*)\)\s*$")


def _dimension(n: int, campo: str) -> None:
    if not 2 <= n <= Config.DIMENSION_MAX_CLI:
        raise SchemaError(f"n = {n}: la CLI admite 2 ≤ n ≤ {Config.DIMENSION_MAX_CLI}", campo=campo)


def leer_matriz(fuente: str) -> np.ndarray:
    """Ruta JSON, JSON literal {"n", "re", "im"} (o envuelto en {"A": …}) o diag(a, b, …)."""
    coincide = _DIAG.match(fuente)
    if coincide:
        try:
            valores = [complex(x.strip().replace("i", "j")) for x in coincide.group(1).split(",")]
        except ValueError as e:
            raise SchemaError(f"diagonal ilegible '{fuente}'", campo="A") from e
        M = np.diag(valores)
    else:
        datos = leer_json(fuente, "A")
        if isinstance(datos, dict) and "A" in datos:
            datos = datos["A"]
        M = matriz_desde_json(datos, "A")
    _dimension(M.shape[0], "A")
    return M


def _generador(fuente: Optional[str]) -> GeneratorSpec:
    if not fuente:
        raise SchemaError("falta --generator", campo="generator")
    datos = leer_json(fuente, "generator")
    if isinstance(datos, dict) and "generator" in datos:
        datos = datos["generator"]
    h = generator_from_json(datos)
    _dimension(h.n, "generator")
    return h


def _datos_iniciales(fuente: Optional[str]) -> Dict[int, HomPolyMap]:
    """{"F0_le": [HomPolyMap, …]} → k ↦ F_k^≤(0); sin fichero, todo 0."""
    if not fuente:
        return {}
    datos = leer_json(fuente, "coeffs")
    salida: Dict[int, HomPolyMap] = {}
    for i, q in enumerate(exigir(datos, "F0_le", list)):
        Q = HomPolyMap.from_json(q, f"F0_le[{i}]")
        salida[Q.k] = salida[Q.k] + Q if Q.k in salida else Q
    return salida


def _rejilla(texto: str) -> np.ndarray:
    """'a:b:num' → linspace(a, b, num)."""
    try:
        a, b, num = texto.split(":")
        return np.linspace(float(a), float(b), int(num))
    except ValueError as e:
        raise SchemaError(f"rejilla '{texto}' no tiene la forma a:b:num", campo="t-grid") from e


def _ruta(config: RunConfig, nombre: str) -> Optional[str]:
    if config.out is None:
        return None
    if config.out.endswith((".json", ".csv")):
        return config.out
    return os.path.join(config.out, nombre)


def _carpeta(config: RunConfig) -> str:
    carpeta = config.out or "."
    if carpeta.endswith((".json", ".csv")):
        carpeta = os.path.dirname(carpeta) or "."
    os.makedirs(carpeta, exist_ok=True)
    return carpeta


# ──────────────────────────────────────────────────────────────────────────────
# COMANDOS
# ──────────────────────────────────────────────────────────────────────────────

def _analyze(config: RunConfig) -> Informe:
    A = analyze(leer_matriz(config.inputs["A"]))
    certificados = exp_norm_certificates(A, np.linspace(0.0, 10.0, 11))
    informe = {**A.to_json(), "spectral_split": spectral_split(A.entries).to_json(),
               "exp_norm_certificates": certificados}
    return informe, certificados["passed"]


def _resonance(config: RunConfig) -> Informe:
    informe = resonance_report(analyze(leer_matriz(config.inputs["A"])), config.params["kmax"])
    return informe, informe["passed"]


def _evolve(config: RunConfig) -> Informe:
    h = _generador(config.inputs.get("generator"))
    validacion = validate(h, samples_per_sphere=256, seed=config.seed, strict=False)
    puntos = leer_puntos_csv(config.inputs["points"], h.n)
    s, t_end = config.params["s"], config.params["t_end"]
    trayectorias = integrate_batch(h, puntos, s, t_end, config.tol)
    carpeta = _carpeta(config)
    filas = []
    for i, traj in enumerate(trayectorias, start=1):
        ruta = os.path.join(carpeta, f"trajectory_{i}.csv")
        traj.export(ruta)
        desigualdad = check_transition_inequality(traj, h.A)
        schwarz = check_schwarz(traj, 1e-6)
        filas.append({"point": i, "csv": ruta, "inequality_max_ratio": desigualdad["max_ratio"],
                      "schwarz": schwarz["passed"],
                      "passed": desigualdad["passed"] and schwarz["passed"]})
    informe = {"generator": h.nombre, "generator_hash": h.hash(), "validation_passed": validacion["passed"],
               "min_real_part": validacion["min_real_part"], "trajectories": filas}
    return informe, validacion["passed"] and all(f["passed"] for f in filas)


def _coefficients(config: RunConfig) -> Informe:
    h = _generador(config.inputs.get("generator"))
    soluciones = solve_chain_coefficients(h, _datos_iniciales(config.inputs.get("coeffs")),
                                          config.params.get("kmax"))
    rejilla = _rejilla(config.params["t_grid"])
    carpeta = _carpeta(config)
    filas = []
    for k, sol in soluciones.items():
        ruta = os.path.join(carpeta, f"F{k}.csv")
        sol.export(ruta, rejilla)
        residuo = residual_check(sol, (lambda kk: lambda t: compute_Nk(soluciones, h, kk, t))(k), rejilla)
        filas.append({"k": k, "csv": ruta, **sol.to_json(),
                      "max_relative_residual": residuo["max_relative_residual"], "passed": residuo["passed"]})
    return {"generator": h.nombre, "orders": filas}, all(f["passed"] for f in filas)


def _chain(config: RunConfig) -> Informe:
    h = _generador(config.inputs.get("generator"))
    coeffs = solve_chain_coefficients(h, _datos_iniciales(config.inputs.get("coeffs")))
    puntos = leer_puntos_csv(config.inputs["points"], h.n)
    ev = chain_limit(h, coeffs, puntos, config.params["s"], config.tol)
    informe = ev.to_json()
    ruta = _ruta(config, "chain_values.csv")
    if ruta:
        # el informe ocupa <out>.json; los valores van aparte
        csv = ruta if ruta.endswith(".csv") else os.path.splitext(ruta)[0] + "_values.csv"
        informe["csv"] = csv
        ev.export(csv)
    return informe, ev.converged and ev.decay_consistent is not False


def _growth(config: RunConfig) -> Informe:
    h = _generador(config.inputs.get("generator"))
    coeffs = solve_chain_coefficients(h, _datos_iniciales(config.inputs.get("coeffs")))
    try:
        radios = [float(r) for r in config.params["radii"].split(",")]
    except ValueError as e:
        raise SchemaError(f"radios ilegibles '{config.params['radii']}'", campo="radii") from e
    perfil = growth_profile(h, coeffs, config.params["s"], radios, config.params["samples"],
                            config.tol, config.seed)
    informe = check_growth_bound(perfil, h.A, epsilon=config.eps)
    return {"generator": h.nombre, "s": config.params["s"], **informe}, informe["passed"]


def _spirallike(config: RunConfig) -> Informe:
    datos = leer_json(config.inputs["h"], "h")
    if isinstance(datos, dict) and "form" in datos:
        h = generator_from_json(datos, "h")
        _dimension(h.n, "h")
    else:
        if not config.inputs.get("A"):
            raise SchemaError("h sin 'form' necesita --A", campo="h")
        A = analyze(leer_matriz(config.inputs["A"]))
        H: Dict[int, HomPolyMap] = {}
        for i, q in enumerate(exigir(datos, "H", list, "h")):
            Q = HomPolyMap.from_json(q, f"h.H[{i}]")
            H[Q.k] = H[Q.k] + Q if Q.k in H else Q
        h = PolynomialAutonomous(A, H)
    K = config.params["K"]
    try:
        solucion = solve_spirallike(h, K)
    except Resonant as e:
        return {"verdict": type(e).__name__, "k": e.k,
                "witnesses": [{"m": list(m), "s": s} for m, s in e.testigos], "message": str(e)}, False
    mapa = solucion.particular if isinstance(solucion, AffineSolutionSet) else solucion
    residuo = spirallike_residual(mapa, h, seed=config.seed)
    informe = {"verdict": "affine_solution_set" if isinstance(solucion, AffineSolutionSet) else "unique",
               "solution": solucion, "residual": residuo}
    return informe, residuo["passed"]


def _witness(config: RunConfig) -> Informe:
    A = analyze(leer_matriz(config.inputs["A"]))
    testigo = noncompactness_witness(A, config.params["M"], config.params.get("k0"))
    pertenencia = spirallike_membership(testigo.map, A, seed=config.seed)
    informe = {**testigo.to_json(), "membership": {k: v for k, v in pertenencia.items() if k != "details"}}
    return informe, testigo.certificate["passed"] and pertenencia["passed"]


def _extend(config: RunConfig) -> Informe:
    p = config.params
    ext = roper_suffridge_extend(p["f"], p["alpha"], p["beta"], p["lambda"], p["K"])
    validacion = validate(ext.generator, samples_per_sphere=256, seed=config.seed, strict=False)
    informe = {**ext.to_json(), "generator_valid": validacion["passed"],
               "min_real_part": validacion["min_real_part"]}
    return informe, ext.admissibility["admissible"] and validacion["passed"]


def _verify(config: RunConfig) -> Informe:
    rapido = bool(config.params.get("rapido", False))
    suites = run_suites(config.params["suite"], config.seed, rapido)
    return {"seed": config.seed, "reduced_sizes": rapido, "suites": suites}, all(s["passed"] for s in suites)


_MANEJADORES: Dict[str, Callable[[RunConfig], Informe]] = {
    "analyze": _analyze, "resonance": _resonance, "evolve": _evolve, "coefficients": _coefficients,
    "chain": _chain, "growth": _growth, "spirallike": _spirallike, "extend": _extend, "witness": _witness,
    "verify": _verify,
}


def run(config: RunConfig) -> int:
    manejador = _MANEJADORES.get(config.command)
    if manejador is None:
        log.error(f"❌ comando desconocido '{config.command}'")
        return 1
    try:
        informe, pasa = manejador(config)
    except (LoewnerError, OSError) as e:
        log.error(f"❌ {config.command}: {type(e).__name__}: {e}")
        click.echo(f"error: {e}", err=True)
        return 1

    informe = {"command": config.command, "status": "ok", "passed": bool(pasa), **informe}
    ruta = _ruta(config, f"{config.command}.json")
    if ruta and ruta.endswith(".json"):
        escribir_json(ruta, informe)
    else:
        click.echo(dumps(informe).decode("utf-8"))
    if not pasa:
        log.warning(f"⚠️  {config.command}: alguna comprobación falló")
    return 0 if pasa else 2


# ──────────────────────────────────────────────────────────────────────────────
# CLICK
# ──────────────────────────────────────────────────────────────────────────────

def _salir(config: RunConfig) -> None:
    click.get_current_context().exit(run(config))


@click.group()
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING… (def. LOEWNER_LOG_LEVEL o INFO)")
@click.option("--log-file", default=None, help="Fichero de log rotativo")
def cli(log_level: Optional[str], log_file: Optional[str]) -> None:
    """Cadenas de Loewner en la bola unidad de C^n."""
    configurar_logging(log_level, log_file)


@cli.command("analyze")
@click.option("--A", "matriz", required=True, help="JSON de A, ruta o diag(a,b,…)")
@click.option("--out", default=None)
def analyze_cmd(matriz: str, out: Optional[str]) -> None:
    _salir(RunConfig("analyze", {"A": matriz}, out=out))


@cli.command("resonance")
@click.option("--A", "matriz", required=True)
@click.option("--kmax", default=4, show_default=True, type=int)
@click.option("--out", default=None)
def resonance_cmd(matriz: str, kmax: int, out: Optional[str]) -> None:
    _salir(RunConfig("resonance", {"A": matriz}, {"kmax": kmax}, out=out))


@cli.command("evolve")
@click.option("--generator", required=True)
@click.option("--points", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--s", default=0.0, show_default=True, type=float)
@click.option("--t-end", default=10.0, show_default=True, type=float)
@click.option("--tol", default=1e-9, show_default=True, type=float)
@click.option("--seed", default=Config.SEMILLA_DEFECTO, show_default=True, type=int)
@click.option("--out", default=None)
def evolve_cmd(generator: str, points: str, s: float, t_end: float, tol: float, seed: int,
               out: Optional[str]) -> None:
    _salir(RunConfig("evolve", {"generator": generator, "points": points}, {"s": s, "t_end": t_end},
                     tol=tol, out=out, seed=seed))


@cli.command("coefficients")
@click.option("--generator", required=True)
@click.option("--coeffs", default=None, help='JSON {"F0_le": [...]}; por defecto F_k^≤(0) = 0')
@click.option("--kmax", default=None, type=int)
@click.option("--t-grid", default="0:10:41", show_default=True)
@click.option("--out", default=None)
def coefficients_cmd(generator: str, coeffs: Optional[str], kmax: Optional[int], t_grid: str,
                     out: Optional[str]) -> None:
    _salir(RunConfig("coefficients", {"generator": generator, "coeffs": coeffs},
                     {"kmax": kmax, "t_grid": t_grid}, out=out))


@cli.group("chain")
def chain_grp() -> None:
    """Evaluación de g(z, s)."""


@chain_grp.command("evaluate")
@click.option("--generator", required=True)
@click.option("--coeffs", default=None)
@click.option("--points", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--s", default=0.0, show_default=True, type=float)
@click.option("--tol", default=1e-8, show_default=True, type=float)
@click.option("--out", default=None)
def chain_evaluate_cmd(generator: str, coeffs: Optional[str], points: str, s: float, tol: float,
                       out: Optional[str]) -> None:
    _salir(RunConfig("chain", {"generator": generator, "coeffs": coeffs, "points": points},
                     {"s": s}, tol=tol, out=out))


@chain_grp.command("growth")
@click.option("--generator", required=True)
@click.option("--coeffs", default=None)
@click.option("--s", default=0.0, show_default=True, type=float)
@click.option("--radii", default="0.5,0.7,0.8,0.9,0.95", show_default=True)
@click.option("--samples", default=64, show_default=True, type=int)
@click.option("--eps", default=Config.EPS_CRECIMIENTO, show_default=True, type=float)
@click.option("--tol", default=1e-8, show_default=True, type=float)
@click.option("--seed", default=Config.SEMILLA_DEFECTO, show_default=True, type=int)
@click.option("--out", default=None)
def chain_growth_cmd(generator: str, coeffs: Optional[str], s: float, radii: str, samples: int,
                     eps: float, tol: float, seed: int, out: Optional[str]) -> None:
    _salir(RunConfig("growth", {"generator": generator, "coeffs": coeffs},
                     {"s": s, "radii": radii, "samples": samples}, tol=tol, eps=eps, out=out, seed=seed))


@cli.group("spirallike")
def spirallike_grp() -> None:
    """Ecuación Df·h = Af, testigos y extensiones."""


@spirallike_grp.command("solve")
@click.option("--A", "matriz", default=None)
@click.option("--h", "campo", required=True, help='generador JSON o {"H": [...]} sobre --A')
@click.option("--K", "K", default=5, show_default=True, type=int)
@click.option("--seed", default=Config.SEMILLA_DEFECTO, show_default=True, type=int)
@click.option("--out", default=None)
def spirallike_solve_cmd(matriz: Optional[str], campo: str, K: int, seed: int, out: Optional[str]) -> None:
    _salir(RunConfig("spirallike", {"A": matriz, "h": campo}, {"K": K}, out=out, seed=seed))


@spirallike_grp.command("witness")
@click.option("--A", "matriz", required=True)
@click.option("--M", "M", required=True, type=float)
@click.option("--k0", default=None, type=int)
@click.option("--seed", default=Config.SEMILLA_DEFECTO, show_default=True, type=int)
@click.option("--out", default=None)
def spirallike_witness_cmd(matriz: str, M: float, k0: Optional[int], seed: int, out: Optional[str]) -> None:
    _salir(RunConfig("witness", {"A": matriz}, {"M": M, "k0": k0}, out=out, seed=seed))


@spirallike_grp.command("extend")
@click.option("--f", "f", default="koebe", show_default=True, type=click.Choice(["koebe", "identity", "convex"]))
@click.option("--alpha", required=True, type=float)
@click.option("--beta", required=True, type=float)
@click.option("--lambda", "lam", required=True, type=float)
@click.option("--K", "K", default=4, show_default=True, type=int)
@click.option("--seed", default=Config.SEMILLA_DEFECTO, show_default=True, type=int)
@click.option("--out", default=None)
def spirallike_extend_cmd(f: str, alpha: float, beta: float, lam: float, K: int, seed: int,
                          out: Optional[str]) -> None:
    _salir(RunConfig("extend", params={"f": f, "alpha": alpha, "beta": beta, "lambda": lam, "K": K},
                     out=out, seed=seed))


@cli.command("verify")
@click.option("--suite", default="all", show_default=True, type=click.Choice(["all", *SUITES]))
@click.option("--rapido", is_flag=True, envvar="LOEWNER_RAPIDO", help="Tamaños reducidos para iterar en local.")
@click.option("--seed", default=Config.SEMILLA_DEFECTO, show_default=True, type=int)
@click.option("--out", default=None)
def verify_cmd(suite: str, seed: int, rapido: bool, out: Optional[str]) -> None:
    _salir(RunConfig("verify", params={"suite": suite, "rapido": rapido}, out=out, seed=seed))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Punto de entrada: los errores de uso de click también salen con 1."""
    try:
        codigo = cli.main(args=list(argv) if argv is not None else None, prog_name="loewner",
                          standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        return 1
    return int(codigo or 0)
