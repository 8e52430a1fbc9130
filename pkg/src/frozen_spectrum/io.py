"""Reading inputs and writing deterministic JSON and CSV outputs.

Every number is written with 17 significant digits, keys keep insertion
order, and non-finite floats become ``null``, so equal results give
byte-identical files.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .forward import Spectrum
from .geometry import Geometry, Potential

__all__ = ["SCHEMA", "dumps", "write_json", "read_json", "load_geometry", "load_potential",
           "load_spectrum", "write_csv", "envelope"]

SCHEMA = "frozen-spectrum/1"

# names available to potential expressions
_EXPR_NAMES = {name: getattr(np, name) for name in (
    "sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "arctan", "abs", "where",
    "minimum", "maximum", "pi", "e")}


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == 0.0:
        return "0.0"
    s = format(x, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating, bool)) or v is None for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 1) -> str:
    return _encode(obj, indent, 0) + "\n"


def envelope(command: str, config: dict, body: dict) -> dict:
    """The common frame of every output file."""
    out = {"schema": SCHEMA, "command": command, "config": config}
    out.update(body)
    return out


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def load_geometry(path) -> Geometry:
    data = read_json(path)
    # a bare geometry, or any output file that carries one
    for key in ("geometry", "spectrum"):
        if "gamma" not in data and isinstance(data.get(key), dict):
            data = data[key]
    data = data.get("geometry", data)
    try:
        return Geometry.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: a geometry needs gamma, d and l") from exc


def _expression(text: str):
    code = compile(text, "<potential>", "eval")
    for name in code.co_names:
        if name not in _EXPR_NAMES and name != "t":
            raise ValidationError(f"unknown name {name!r} in potential expression {text!r}")

    def f(t):
        return eval(code, {"__builtins__": {}}, dict(_EXPR_NAMES, t=t))

    return f


def load_potential(path, geom: Geometry) -> Potential:
    """Either sampled segments (as written by the package) or expressions in ``t``.

    Expression form: ``{"left": "cos(pi*t)", "right": "t - 2"}`` with
    optional ``"dleft"``; ``{"zero": true}`` is the zero potential.
    """
    data = read_json(path)
    data = data.get("potential", data)
    if data.get("zero"):
        return Potential.zero()
    if "segments" in data:
        try:
            return Potential.from_dict(data, geom)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"{path}: malformed segments") from exc
    if "left" in data and "right" in data:
        try:
            funcs = {k: _expression(str(data[k])) for k in ("left", "right", "dleft") if k in data}
        except SyntaxError as exc:
            raise ValidationError(f"{path}: bad expression: {exc}") from exc
        return Potential.from_callables(funcs["left"], funcs["right"], geom, dleft=funcs.get("dleft"))
    raise ValidationError(f"{path}: expected 'segments' or 'left'/'right' expressions")


def load_spectrum(path) -> Spectrum:
    data = read_json(path)
    data = data.get("spectrum", data)
    try:
        return Spectrum.from_dict(data)
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: a spectrum needs 'values' as [re, im] pairs") from exc


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else str(int(v)) if isinstance(v, (int, np.integer))
                              else _format_float(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
