"""Canonical JSON encoding helpers."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .errors import InputError


def frac_to_str(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def str_to_frac(s: Any) -> Fraction:
    if isinstance(s, bool):
        raise InputError(f"not a rational: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {s!r}") from exc
    raise InputError(f"not a rational: {s!r}")


def dumps(doc: Any) -> str:
    """Sorted keys, no floats, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc


def _reject_float(s: str):
    raise InputError(f"floating point literal {s} not allowed; use \"p/q\" strings")


def require(doc: Any, key: str, kind: type | tuple = object):
    if not isinstance(doc, dict) or key not in doc:
        raise InputError(f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise InputError(f"field {key!r} has wrong type")
    return value
