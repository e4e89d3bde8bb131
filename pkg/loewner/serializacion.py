# ==============================================================================
# serializacion.py
# Lectura/escritura JSON (orjson) y CSV (pandas) con validación de campos.
#
# Formatos de entrada documentados en schemas/*.schema.json. La validación es
# explícita campo a campo para poder reportar la ruta del campo y, si el JSON
# ni siquiera parsea, la línea/columna del error.
# ==============================================================================

from __future__ import annotations

import hashlib
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import orjson
import pandas as pd

from .config import Config
from .errores import SchemaError

log = logging.getLogger(__name__)

OPCIONES_JSON = orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_SORT_KEYS


# ──────────────────────────────────────────────────────────────────────────────
# CONVERSIÓN A TIPOS JSON
# ──────────────────────────────────────────────────────────────────────────────

def convertir_a_serializable(obj: Any) -> Any:
    if hasattr(obj, "to_json") and callable(obj.to_json):
        return convertir_a_serializable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): convertir_a_serializable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [convertir_a_serializable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _flotante(obj.real), "im": _flotante(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return _flotante(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": convertir_a_serializable(obj.real.tolist()),
                    "im": convertir_a_serializable(obj.imag.tolist())}
        return convertir_a_serializable(obj.tolist())
    return obj


def _flotante(x: Any) -> Optional[float]:
    x = float(x)
    if np.isnan(x):
        return None
    if np.isinf(x):
        return 1e308 if x > 0 else -1e308
    return x


def dumps(obj: Any) -> bytes:
    """JSON determinista: claves ordenadas, sangría fija, floats de orjson."""
    return orjson.dumps(convertir_a_serializable(obj), option=OPCIONES_JSON)


def loads(contenido: Any, origen: str = "") -> Any:
    try:
        return orjson.loads(contenido)
    except orjson.JSONDecodeError as e:
        raise SchemaError(f"JSON mal formado: {e.msg}", campo=origen,
                          linea=e.lineno, columna=e.colno) from e


def leer_json(fuente: str, origen: str = "") -> Any:
    """Acepta una ruta a fichero o el JSON literal (útil en la CLI)."""
    if os.path.isfile(fuente):
        with open(fuente, "rb") as f:
            return loads(f.read(), origen or os.path.basename(fuente))
    return loads(fuente, origen)


def escribir_json(ruta: str, obj: Any) -> None:
    carpeta = os.path.dirname(ruta)
    if carpeta:
        os.makedirs(carpeta, exist_ok=True)
    with open(ruta, "wb") as f:
        f.write(dumps(obj))
    log.info(f"✅ JSON escrito en {ruta}")


def huella(obj: Any) -> str:
    """sha256 del JSON canónico (sin sangría) de un objeto."""
    crudo = orjson.dumps(convertir_a_serializable(obj), option=orjson.OPT_SORT_KEYS)
    return hashlib.sha256(crudo).hexdigest()


# ──────────────────────────────────────────────────────────────────────────────
# VALIDACIÓN DE CAMPOS
# ──────────────────────────────────────────────────────────────────────────────

def exigir(datos: Any, clave: str, tipos: Any, campo: str = "") -> Any:
    ruta = f"{campo}.{clave}" if campo else clave
    if not isinstance(datos, dict):
        raise SchemaError("se esperaba un objeto", campo=campo)
    if clave not in datos:
        raise SchemaError("campo obligatorio ausente", campo=ruta)
    valor = datos[clave]
    if tipos is float and isinstance(valor, int) and not isinstance(valor, bool):
        return float(valor)
    if not isinstance(valor, tipos) or isinstance(valor, bool) and tipos is not bool:
        raise SchemaError(f"tipo inválido ({type(valor).__name__})", campo=ruta)
    return valor


def opcional(datos: dict, clave: str, tipos: Any, defecto: Any, campo: str = "") -> Any:
    if clave not in datos or datos[clave] is None:
        return defecto
    return exigir(datos, clave, tipos, campo)


def complejo_desde_json(valor: Any, campo: str) -> complex:
    """Un escalar complejo: número real o {"re": x, "im": y}."""
    if isinstance(valor, (int, float)) and not isinstance(valor, bool):
        return complex(valor)
    if isinstance(valor, dict):
        re = exigir(valor, "re", float, campo)
        im = opcional(valor, "im", float, 0.0, campo)
        return complex(re, im)
    raise SchemaError("se esperaba un número o {re, im}", campo=campo)


def _tabla_numerica(filas: Any, n: int, campo: str) -> np.ndarray:
    if not isinstance(filas, list) or len(filas) != n:
        raise SchemaError(f"se esperaban {n} filas", campo=campo)
    salida = np.zeros((n, n))
    for i, fila in enumerate(filas):
        if not isinstance(fila, list) or len(fila) != n:
            raise SchemaError(f"se esperaban {n} columnas", campo=f"{campo}[{i}]")
        for j, x in enumerate(fila):
            if not isinstance(x, (int, float)) or isinstance(x, bool):
                raise SchemaError("entrada no numérica", campo=f"{campo}[{i}][{j}]")
            salida[i, j] = float(x)
    return salida


def matriz_a_json(M: np.ndarray) -> Dict[str, Any]:
    M = np.asarray(M, dtype=complex)
    return {"n": int(M.shape[0]), "re": M.real.tolist(), "im": M.imag.tolist()}


def matriz_desde_json(datos: Any, campo: str = "A") -> np.ndarray:
    n = exigir(datos, "n", int, campo)
    if n < 1:
        raise SchemaError("n debe ser ≥ 1", campo=f"{campo}.n")
    re = _tabla_numerica(exigir(datos, "re", list, campo), n, f"{campo}.re")
    im = _tabla_numerica(datos["im"], n, f"{campo}.im") if "im" in datos else np.zeros((n, n))
    return re + 1j * im


# ──────────────────────────────────────────────────────────────────────────────
# CSV
# ──────────────────────────────────────────────────────────────────────────────

def columnas_complejas(prefijo: str, n: int) -> List[str]:
    cols: List[str] = []
    for i in range(1, n + 1):
        cols += [f"re_{prefijo}{i}", f"im_{prefijo}{i}"]
    return cols


def aplanar_complejos(valores: np.ndarray) -> np.ndarray:
    """(N, n) complejo → (N, 2n) real intercalando Re/Im por componente."""
    valores = np.atleast_2d(np.asarray(valores, dtype=complex))
    plano = np.empty((valores.shape[0], 2 * valores.shape[1]))
    plano[:, 0::2] = valores.real
    plano[:, 1::2] = valores.imag
    return plano


def escribir_csv(ruta: str, df: pd.DataFrame) -> None:
    carpeta = os.path.dirname(ruta)
    if carpeta:
        os.makedirs(carpeta, exist_ok=True)
    df.to_csv(ruta, index=False, float_format=Config.DIGITOS_CSV)
    log.info(f"✅ CSV escrito en {ruta} ({len(df)} filas)")


def leer_puntos_csv(ruta: str, n: Optional[int] = None) -> np.ndarray:
    """
    Lee puntos de C^n. Columnas re_z1, im_z1, … ; si no existen se toman las
    columnas numéricas por pares (Re, Im) en orden.
    """
    try:
        df = pd.read_csv(ruta)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(f"CSV ilegible: {e}", campo=os.path.basename(ruta)) from e

    if "re_z1" in df.columns:
        dim = n or sum(1 for c in df.columns if c.startswith("re_z"))
        cols = columnas_complejas("z", dim)
        faltan = [c for c in cols if c not in df.columns]
        if faltan:
            raise SchemaError(f"faltan columnas {faltan}", campo=os.path.basename(ruta))
        plano = df[cols].to_numpy(dtype=float)
    else:
        plano = df.select_dtypes("number").to_numpy(dtype=float)
        if plano.shape[1] % 2:
            raise SchemaError("número impar de columnas numéricas", campo=os.path.basename(ruta))
        if n is not None and plano.shape[1] != 2 * n:
            raise SchemaError(f"se esperaban {2 * n} columnas", campo=os.path.basename(ruta))
    return plano[:, 0::2] + 1j * plano[:, 1::2]


def tabla_compleja(tiempos: Sequence[float], valores: np.ndarray, prefijo: str,
                   col_tiempo: str = "t") -> pd.DataFrame:
    valores = np.asarray(valores, dtype=complex)
    df = pd.DataFrame(aplanar_complejos(valores), columns=columnas_complejas(prefijo, valores.shape[1]))
    df.insert(0, col_tiempo, np.asarray(tiempos, dtype=float))
    return df
