"""JSON file formats for problem instances and sampling schemes.

Instance::

    {"A": [[...], ...], "b": [...], "gamma": 1.0, "v": [...]}

Scheme (set indices are 1-based; ``q`` defaults to uniform when absent)::

    {"n": 3, "tau": 1, "sets": [[1, 2], [2, 3]], "q": [0.5, 0.5]}
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError
from .objective import ProblemSpec, build_least_squares
from .sampling import SamplingScheme, build_scheme

__all__ = [
    "instance_to_text",
    "scheme_to_text",
    "read_instance",
    "write_instance",
    "read_scheme",
    "write_scheme",
    "instance_hash",
]


def _num(x):
    return json.dumps(float(x))


def _vec(xs):
    return "[" + ", ".join(_num(x) for x in xs) + "]"


def instance_to_text(prob: ProblemSpec) -> str:
    rows = ",\n".join("    " + _vec(row) for row in prob.A)
    return (
        "{\n"
        f'  "A": [\n{rows}\n  ],\n'
        f'  "b": {_vec(prob.b)},\n'
        f'  "gamma": {_num(prob.gamma)},\n'
        f'  "v": {_vec(prob.v)}\n'
        "}\n"
    )


def scheme_to_text(scheme: SamplingScheme) -> str:
    sets = ", ".join("[" + ", ".join(str(int(i) + 1) for i in s) + "]" for s in scheme.sets)
    return (
        "{\n"
        f'  "n": {scheme.n},\n'
        f'  "tau": {scheme.tau},\n'
        f'  "sets": [{sets}],\n'
        f'  "q": {_vec(scheme.q)}\n'
        "}\n"
    )


def instance_hash(prob: ProblemSpec) -> str:
    return hashlib.sha256(instance_to_text(prob).encode()).hexdigest()[:16]


def _load(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise FormatError(f"{path}: cannot read file ({e.strerror})") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    return path, doc


def _field(path, doc, name, kind):
    if name not in doc:
        raise FormatError(f"{path}: missing field '{name}'")
    value = doc[name]
    try:
        if kind == "matrix":
            if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
                raise TypeError("expected a nonempty array of rows")
            if len({len(r) for r in value}) != 1:
                raise TypeError("rows have different lengths")
            return np.array(value, dtype=float)
        if kind == "vector":
            if not isinstance(value, list):
                raise TypeError("expected an array of numbers")
            return np.array(value, dtype=float)
        if kind == "real":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError("expected a number")
            return float(value)
        if kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError("expected an integer")
            return value
        if kind == "sets":
            if not isinstance(value, list) or not all(isinstance(s, list) for s in value):
                raise TypeError("expected an array of index arrays")
            out = []
            for s in value:
                if not all(isinstance(i, int) and not isinstance(i, bool) for i in s):
                    raise TypeError("set entries must be integers")
                out.append([i - 1 for i in s])
            return out
    except (TypeError, ValueError) as e:
        raise FormatError(f"{path}: field '{name}': {e}") from e
    raise AssertionError(kind)


def read_instance(path) -> ProblemSpec:
    path, doc = _load(path)
    A = _field(path, doc, "A", "matrix")
    b = _field(path, doc, "b", "vector")
    gamma = _field(path, doc, "gamma", "real")
    v = _field(path, doc, "v", "vector")
    try:
        return build_least_squares(A, b, gamma, v)
    except ValidationError as e:
        raise FormatError(f"{path}: {e}") from e


def read_scheme(path) -> SamplingScheme:
    path, doc = _load(path)
    n = _field(path, doc, "n", "int")
    tau = _field(path, doc, "tau", "int")
    sets = _field(path, doc, "sets", "sets")
    q = _field(path, doc, "q", "vector") if "q" in doc else np.full(len(sets), 1.0 / max(1, len(sets)))
    try:
        return build_scheme(n, sets, q, tau)
    except ValidationError as e:
        raise FormatError(f"{path}: {e}") from e


def write_instance(prob: ProblemSpec, path) -> None:
    Path(path).write_text(instance_to_text(prob))


def write_scheme(scheme: SamplingScheme, path) -> None:
    Path(path).write_text(scheme_to_text(scheme))
