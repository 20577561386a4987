"""Text-document encoding shared by instance and report files.

Documents are JSON with a strict schema: complex scalars are two-element
``[re, im]`` arrays, matrices are row-major nested arrays, per-block data is
a list with one matrix per algebra block.  Doubles are emitted with 17
significant digits so that parsing reproduces every value bit-exactly, and
unknown fields are rejected on load.
"""

from __future__ import annotations

import json
import math
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, ValidationError

SCHEMA_VERSION = 1


def format_double(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"non-finite double {x!r} cannot be serialized")
    return format(x, ".17g")


def emit_document(obj: Any) -> str:
    """Serialize to JSON text with fixed float formatting."""
    pieces: list[str] = []
    _emit(obj, pieces)
    return "".join(pieces)


def _emit(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_double(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, Mapping):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    else:
        raise ValidationError(f"cannot serialize value of type {type(obj).__name__}")


def parse_document(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed document at line {e.lineno}, column {e.colno}: {e.msg}") from e


def check_keys(obj: Mapping, required: Iterable[str], optional: Iterable[str], where: str) -> None:
    if not isinstance(obj, Mapping):
        raise ValidationError(f"{where}: expected an object")
    required = set(required)
    allowed = required | set(optional)
    keys = set(obj.keys())
    missing = required - keys
    unknown = keys - allowed
    if missing:
        raise ValidationError(f"{where}: missing field(s) {sorted(missing)}")
    if unknown:
        raise ValidationError(f"{where}: unknown field(s) {sorted(unknown)}")


def encode_matrix(m: np.ndarray) -> list:
    """Row-major nested arrays of [re, im] pairs."""
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def decode_matrix(obj: Any, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != rows:
        raise ValidationError(f"{where}: expected {rows} rows")
    out = np.zeros((rows, cols), dtype=np.complex128)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise ValidationError(f"{where}: row {i} must have {cols} entries")
        for j, v in enumerate(row):
            if (
                not isinstance(v, list)
                or len(v) != 2
                or not all(isinstance(t, (int, float)) for t in v)
            ):
                raise ValidationError(f"{where}: entry ({i},{j}) must be an [re, im] pair")
            out[i, j] = complex(float(v[0]), float(v[1]))
    return out


def encode_blocks(blocks: Sequence[np.ndarray]) -> list:
    return [encode_matrix(m) for m in blocks]


def decode_blocks(
    obj: Any, shapes: Sequence[tuple[int, int]], where: str
) -> tuple[np.ndarray, ...]:
    if not isinstance(obj, list) or len(obj) != len(shapes):
        raise ValidationError(f"{where}: expected one matrix per block ({len(shapes)})")
    return tuple(
        decode_matrix(m, r, c, f"{where}[{b}]") for b, (m, (r, c)) in enumerate(zip(obj, shapes))
    )


def expect_int(obj: Any, where: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ValidationError(f"{where}: expected an integer")
    return obj


def expect_schema(doc: Mapping, kind: str) -> None:
    if doc.get("schema") != SCHEMA_VERSION:
        raise ValidationError(f"schema: expected {SCHEMA_VERSION}, got {doc.get('schema')!r}")
    if doc.get("kind") != kind:
        raise ValidationError(f"kind: expected {kind!r}, got {doc.get('kind')!r}")
