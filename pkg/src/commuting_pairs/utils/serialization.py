"""
Matrix, event and certificate files.

Matrix files hold ``{"dim": M, "re": [[...]], "im": [[...]]}`` with every
double written to 17 significant digits, so a file written here parses and
re-serializes to the same bytes. Every file is checked against a JSON schema
before conversion.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import jsonschema
import numpy as np
from pydantic import ValidationError as PydanticValidationError

from ..core.linalg import HermitianOperator, OrthoProjection
from ..core.models import Certificate, InstanceRecipe
from ..core.spectral import DensityMatrix
from ..exceptions import SerializationError, ValidationError

PathLike = Union[str, Path]

_ROWS = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}

MATRIX_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["dim", "re", "im"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "re": _ROWS,
        "im": _ROWS,
    },
}

EVENT_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["dim", "projections"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "projections": {"type": "array", "minItems": 1, "items": MATRIX_SCHEMA},
    },
}

_NUMBER = {"type": "number"}

CERTIFICATE_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "eps",
        "delta_eps",
        "dX",
        "dOmega",
        "residual",
        "bound_dX",
        "bound_dOmega",
        "C",
        "scale_factor",
        "params",
    ],
    "properties": {
        "eps": _NUMBER,
        "delta_eps": _NUMBER,
        "dX": _NUMBER,
        "dOmega": _NUMBER,
        "residual": _NUMBER,
        "bound_dX": _NUMBER,
        "bound_dOmega": _NUMBER,
        "C": _NUMBER,
        "scale_factor": _NUMBER,
        "params": {
            "type": "object",
            "required": ["delta_exp", "beta_exp"],
            "properties": {"delta_exp": _NUMBER, "beta_exp": _NUMBER},
        },
    },
}


def _format(value: float) -> str:
    if not math.isfinite(value):
        raise SerializationError(f"cannot serialize non-finite entry {value!r}")
    return format(value, ".17g")


def _rows_text(rows: np.ndarray) -> str:
    lines = ["    [" + ", ".join(_format(float(v)) for v in row) + "]" for row in rows]
    return "[\n" + ",\n".join(lines) + "\n  ]"


def dumps_matrix(matrix: Any) -> str:
    """
    Serialize a square matrix.

    Args:
        matrix: Array-like or an operator with a ``matrix`` attribute

    Returns:
        The JSON text, newline terminated
    """
    array = np.asarray(getattr(matrix, "matrix", matrix), dtype=np.complex128)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise SerializationError(f"expected a square matrix, got shape {array.shape}")
    return (
        "{\n"
        f'  "dim": {array.shape[0]},\n'
        f'  "re": {_rows_text(array.real)},\n'
        f'  "im": {_rows_text(array.imag)}\n'
        "}\n"
    )


def write_matrix(matrix: Any, path: PathLike) -> None:
    """Write a matrix file."""
    Path(path).write_text(dumps_matrix(matrix), encoding="utf-8")


def _load_json(text: str, file_path: Optional[str]) -> Any:
    try:
        # parse_int keeps the sign of a serialized -0
        return json.loads(text, parse_int=float)
    except json.JSONDecodeError as e:
        raise SerializationError(
            f"invalid JSON: {e.msg} at column {e.colno}",
            file_path=file_path,
            line=e.lineno,
            original_error=e,
        )


def _validate_schema(document: Any, schema: Dict[str, Any], file_path: Optional[str]) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise SerializationError(
            f"schema violation: {first.message}",
            file_path=file_path,
            field=first.json_path,
            original_error=first,
        )


def _matrix_from_document(
    document: Dict[str, Any], file_path: Optional[str], prefix: str = "$"
) -> np.ndarray:
    dim = int(document["dim"])
    parts = []
    for key in ("re", "im"):
        rows = document[key]
        if len(rows) != dim:
            raise SerializationError(
                f"expected {dim} rows, found {len(rows)}",
                file_path=file_path,
                field=f"{prefix}.{key}",
            )
        for i, row in enumerate(rows):
            if len(row) != dim:
                raise SerializationError(
                    f"expected {dim} entries, found {len(row)}",
                    file_path=file_path,
                    field=f"{prefix}.{key}[{i}]",
                )
        parts.append(np.asarray(rows, dtype=float))
    # assigned part by part so signed zeros survive
    matrix = np.empty((dim, dim), dtype=np.complex128)
    matrix.real, matrix.imag = parts
    return matrix


def loads_matrix(text: str, file_path: Optional[str] = None) -> np.ndarray:
    """
    Parse a matrix file.

    Raises:
        SerializationError: On invalid JSON, a schema violation or a shape mismatch
    """
    document = _load_json(text, file_path)
    if isinstance(document, dict) and isinstance(document.get("dim"), float):
        if document["dim"].is_integer():
            document["dim"] = int(document["dim"])
    _validate_schema(document, MATRIX_SCHEMA, file_path)
    return _matrix_from_document(document, file_path)


def read_matrix(path: PathLike) -> np.ndarray:
    """Read a matrix file."""
    return loads_matrix(_read_text(path), str(path))


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SerializationError("cannot read file", file_path=str(path), original_error=e)


def read_density_matrix(path: PathLike) -> DensityMatrix:
    """Read a matrix file holding a state."""
    try:
        return DensityMatrix(read_matrix(path))
    except ValidationError as e:
        raise SerializationError("not a density matrix", file_path=str(path), original_error=e)


def read_hermitian(path: PathLike) -> HermitianOperator:
    """Read a matrix file holding an observable."""
    try:
        return HermitianOperator(read_matrix(path))
    except ValidationError as e:
        raise SerializationError(
            "not a Hermitian matrix", file_path=str(path), original_error=e
        )


def dumps_event(projections: List[Any]) -> str:
    """Serialize an event as its list of projections."""
    documents = [json.loads(dumps_matrix(p)) for p in projections]
    dim = documents[0]["dim"] if documents else 0
    return json.dumps({"dim": dim, "projections": documents}, indent=2) + "\n"


def write_event(projections: List[Any], path: PathLike) -> None:
    """Write an event file."""
    Path(path).write_text(dumps_event(projections), encoding="utf-8")


def read_event(path: PathLike) -> List[OrthoProjection]:
    """
    Read an event file.

    Returns:
        The projections, in file order; the caller assembles the event partition
    """
    file_path = str(path)
    document = _load_json(_read_text(path), file_path)
    if isinstance(document, dict):
        for item in [document] + list(document.get("projections") or []):
            if isinstance(item, dict) and isinstance(item.get("dim"), float):
                if item["dim"].is_integer():
                    item["dim"] = int(item["dim"])
    _validate_schema(document, EVENT_SCHEMA, file_path)
    projections = []
    for n, item in enumerate(document["projections"]):
        if item["dim"] != document["dim"]:
            raise SerializationError(
                "projection dimension differs from the event dimension",
                file_path=file_path,
                field=f"$.projections[{n}].dim",
            )
        matrix = _matrix_from_document(item, file_path, prefix=f"$.projections[{n}]")
        try:
            projections.append(OrthoProjection(matrix))
        except ValidationError as e:
            raise SerializationError(
                "not an orthogonal projection",
                file_path=file_path,
                field=f"$.projections[{n}]",
                original_error=e,
            )
    return projections


def dumps_certificate(certificate: Certificate) -> str:
    """Certificate JSON, newline terminated."""
    return json.dumps(certificate.to_document(), indent=2) + "\n"


def loads_certificate(text: str, file_path: Optional[str] = None) -> Certificate:
    """Parse and validate a certificate."""
    document = _load_json(text, file_path)
    _validate_schema(document, CERTIFICATE_SCHEMA, file_path)
    try:
        return Certificate.model_validate(document)
    except PydanticValidationError as e:
        first = e.errors()[0]
        location = "$" + "".join(
            f"[{part}]" if isinstance(part, int) else f".{part}" for part in first["loc"]
        )
        raise SerializationError(
            f"invalid certificate: {first['msg']}",
            file_path=file_path,
            field=location,
            original_error=e,
        )


def read_certificate(path: PathLike) -> Certificate:
    """Read a certificate file."""
    return loads_certificate(_read_text(path), str(path))


def write_certificate(certificate: Certificate, path: PathLike) -> None:
    """Write a certificate file."""
    Path(path).write_text(dumps_certificate(certificate), encoding="utf-8")


def write_instance(
    directory: PathLike,
    omega: Any,
    x: Any,
    recipe: Optional[InstanceRecipe] = None,
    eps_measured: Optional[float] = None,
    event: Optional[List[Any]] = None,
) -> Dict[str, Path]:
    """
    Write ``omega.json`` and ``x.json`` (plus ``event.json`` and ``recipe.json``) to a directory.

    Returns:
        The written paths by role
    """
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    written = {"omega": target / "omega.json", "x": target / "x.json"}
    write_matrix(omega, written["omega"])
    write_matrix(x, written["x"])
    if event is not None:
        written["event"] = target / "event.json"
        write_event(event, written["event"])
    if recipe is not None:
        written["recipe"] = target / "recipe.json"
        document = recipe.model_dump()
        if eps_measured is not None:
            document["eps_measured"] = eps_measured
        written["recipe"].write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    return written
