"""Minimal typed-section validation for config tables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .errors import InvalidValue

REQUIRED = object()


@dataclass(frozen=True)
class Field:
    kind: str  # float | int | str | bool | floats | ints | pairs | table | any
    default: Any = REQUIRED
    check: Callable[[Any], bool] | None = None
    why: str = ""
    choices: tuple | None = None


def _coerce(kind, value, path):
    def bad(expected):
        raise InvalidValue(path, f"expected {expected}, got {value!r}")

    if kind == "any":
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            bad("a number")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            bad("an integer")
        return int(value)
    if kind == "str":
        if not isinstance(value, str):
            bad("a string")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            bad("a boolean")
        return value
    if kind == "floats":
        if not isinstance(value, list):
            bad("a list of numbers")
        return [_coerce("float", v, f"{path}[{i}]") for i, v in enumerate(value)]
    if kind == "ints":
        if not isinstance(value, list):
            bad("a list of integers")
        return [_coerce("int", v, f"{path}[{i}]") for i, v in enumerate(value)]
    if kind == "strs":
        if not isinstance(value, list):
            bad("a list of strings")
        return [_coerce("str", v, f"{path}[{i}]") for i, v in enumerate(value)]
    if kind == "pairs":
        if not isinstance(value, list):
            bad("a list of [location, mass] pairs")
        out = []
        for i, pair in enumerate(value):
            p = _coerce("floats", pair, f"{path}[{i}]")
            if len(p) != 2:
                raise InvalidValue(f"{path}[{i}]", "expected [location, mass]")
            out.append(p)
        return out
    if kind == "table":
        if not isinstance(value, dict):
            bad("a table")
        return value
    raise AssertionError(kind)


def validate(data: dict, fields: dict[str, Field], path: str) -> dict:
    """Check ``data`` against ``fields``; fill defaults; reject unknown keys."""
    if not isinstance(data, dict):
        raise InvalidValue(path, "expected a table")
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise InvalidValue(f"{path}.{unknown[0]}", "unknown key")
    out = {}
    for key, f in fields.items():
        p = f"{path}.{key}"
        if key not in data:
            if f.default is REQUIRED:
                raise InvalidValue(p, "missing required key")
            if f.default is not None:
                out[key] = f.default
            continue
        value = _coerce(f.kind, data[key], p)
        if f.choices is not None and value not in f.choices:
            raise InvalidValue(p, f"must be one of {list(f.choices)}, got {value!r}")
        if f.check is not None and not f.check(value):
            raise InvalidValue(p, f.why or f"invalid value {value!r}")
        out[key] = value
    return out
