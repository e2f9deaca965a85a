"""Canonical JSON read/write helpers.

All JSON this package persists or prints goes through dumps(): keys are
sorted, separators carry no whitespace, strings are escaped to ASCII,
and numbers keep their decimal text form (floats via repr, Decimal via
str). Equal values therefore always serialize to identical bytes, which
is what the golden-file tests and the byte-stable round-trip guarantees
rely on. loads() parses real numbers as Decimal so that a loaded value
re-serializes to exactly the bytes it came from.
"""

from __future__ import annotations

import json
import math
from decimal import Decimal
from pathlib import Path

from .errors import InputError, SchemaError


def dumps(value) -> str:
    """Serialize value to canonical JSON text (no trailing newline)."""
    out: list[str] = []
    _emit(value, out)
    return "".join(out)


def loads(text: str):
    """Parse JSON text; real numbers come back as Decimal. The NaN and
    Infinity extensions Python's json module allows are rejected."""
    try:
        return json.loads(text, parse_float=Decimal,
                          parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc


def _reject_constant(name: str):
    raise SchemaError(f"non-finite number {name!r} is not valid JSON")


def read(path) -> object:
    """Load a JSON document from a file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def write(path, value) -> None:
    """Write value as canonical JSON plus a trailing newline."""
    Path(path).write_text(dumps(value) + "\n", encoding="utf-8")


def _emit(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise InputError("non-finite float is not representable in JSON")
        out.append(repr(value))
    elif isinstance(value, Decimal):
        if not value.is_finite():
            raise InputError("non-finite Decimal is not representable in JSON")
        out.append(str(value))
    elif isinstance(value, dict):
        out.append("{")
        first = True
        for key in sorted(value):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _emit(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__} to JSON")
