# tests/test_esquemas.py
"""
Los esquemas de schemas/ y los lectores JSON dicen lo mismo: cada campo
"required" de un esquema es exigido por su lector (falta → SchemaError) y
los documentos mínimos solo usan campos declarados.
"""
import copy
from pathlib import Path

import orjson
import pytest

from loewner.cli import _datos_iniciales
from loewner.errores import SchemaError
from loewner.generators import TimeFunction, generator_from_json
from loewner.polyspace import HomPolyMap
from loewner.serializacion import dumps, matriz_desde_json

ESQUEMAS = Path(__file__).resolve().parents[1] / "schemas"

MATRIZ = {"n": 2, "re": [[2.5, 0.0], [0.0, 1.0]]}
POLINOMIO = {"n": 2, "k": 2, "terms": [{"m": [0, 2], "s": 1, "re": 1.0}]}


def _coeficientes(datos):
    return _datos_iniciales(dumps(datos).decode("utf-8"))


# (esquema, documento mínimo válido, lector)
CASOS = [
    ("matrix", MATRIZ, matriz_desde_json),
    ("hompoly", POLINOMIO, HomPolyMap.from_json),
    ("coeffs", {"F0_le": [POLINOMIO]}, _coeficientes),
    ("timefunction", {"kind": "constant"}, TimeFunction.from_json),
    ("timefunction", {"kind": "exp_decay", "rate": 1.0}, TimeFunction.from_json),
    ("timefunction", {"kind": "window", "T": 3.0}, TimeFunction.from_json),
    ("timefunction", {"kind": "oscillation", "freq": 2.0}, TimeFunction.from_json),
    ("timefunction", {"kind": "table", "times": [0.0, 1.0], "values": [1.0, 0.0]}, TimeFunction.from_json),
    ("generator", {"form": "example", "lambda": 2.5}, generator_from_json),
    ("generator", {"form": "roper_suffridge", "f": "koebe", "alpha": 1.5, "beta": 0.5, "lambda": 2.0},
     generator_from_json),
    ("generator", {"form": "polynomial_autonomous", "A": MATRIZ}, generator_from_json),
    ("generator", {"form": "polynomial_time_dependent", "A": MATRIZ,
                   "terms": [{"a": {"kind": "window", "T": 3.0}, "Q": POLINOMIO}]}, generator_from_json),
]


def _esquema(nombre):
    return orjson.loads((ESQUEMAS / f"{nombre}.schema.json").read_bytes())


def _rama(esquema, documento):
    """Rama de oneOf cuyo discriminante const coincide con el documento."""
    for rama in esquema.get("oneOf", []):
        for clave, prop in rama.get("properties", {}).items():
            if "const" in prop and documento.get(clave) == prop["const"]:
                return rama
    return {}


def _ids(casos):
    return [f"{e}-{d.get('kind') or d.get('form') or 'base'}" for e, d, _ in casos]


def test_every_schema_parses_and_names_itself():
    ficheros = sorted(ESQUEMAS.glob("*.schema.json"))
    assert len(ficheros) == 7
    for ruta in ficheros:
        esquema = orjson.loads(ruta.read_bytes())
        assert esquema["$id"] == ruta.name
        assert "title" in esquema


@pytest.mark.parametrize("nombre, documento, lector", CASOS, ids=_ids(CASOS))
def test_minimal_document_is_accepted(nombre, documento, lector):
    esquema = _esquema(nombre)
    declarados = set(esquema.get("properties", {})) | set(_rama(esquema, documento).get("properties", {}))
    assert set(documento) <= declarados
    lector(copy.deepcopy(documento))


@pytest.mark.parametrize("nombre, documento, lector", CASOS, ids=_ids(CASOS))
def test_required_fields_are_enforced(nombre, documento, lector):
    esquema = _esquema(nombre)
    obligatorios = esquema.get("required", []) + _rama(esquema, documento).get("required", [])
    assert obligatorios
    for clave in obligatorios:
        incompleto = copy.deepcopy(documento)
        del incompleto[clave]
        with pytest.raises(SchemaError):
            lector(incompleto)


@pytest.mark.parametrize("clave", _esquema("hompoly")["properties"]["terms"]["items"]["required"])
def test_hompoly_term_fields_are_enforced(clave):
    incompleto = copy.deepcopy(POLINOMIO)
    del incompleto["terms"][0][clave]
    with pytest.raises(SchemaError):
        HomPolyMap.from_json(incompleto)


def test_generator_without_form_is_rejected():
    with pytest.raises(SchemaError) as exc:
        generator_from_json({"lambda": 2.5})
    assert exc.value.campo == "generator.form"
