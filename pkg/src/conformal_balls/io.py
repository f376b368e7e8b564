"""JSON documents for configurations.

A document is ``{"schema": 1, "n": n, "arity": j, "maps": [...]}`` where each
entry of ``maps`` lists the ``(n+2)^2`` matrix entries in row-major order and
``maps[0]`` is pi.  Floats carry 17 significant digits, so writing, reading
and writing again reproduces the same bytes.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .conformal import TOL_LORENTZ, LorentzMap, NumericalError, check_dimension, relative_defect, renormalize
from .operad import MAX_ARITY, Configuration, InvalidConfiguration, ValidationReport, validate_config

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    """A document that cannot be parsed into a configuration at all.

    ``violation`` is ``"parse"`` for malformed JSON and ``"schema"`` for a
    well-formed document with the wrong shape or version.
    """

    def __init__(self, violation: str, message: str):
        super().__init__(message)
        self.violation = violation


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite entry {x!r}")
    return format(float(x), ".17g")


def dumps_config(c: Configuration) -> str:
    rows = ",\n".join(
        "    [" + ", ".join(_format_float(x) for x in f.matrix.ravel()) + "]" for f in c.maps
    )
    return (
        "{\n"
        f'  "schema": {SCHEMA_VERSION},\n'
        f'  "n": {c.n},\n'
        f'  "arity": {c.arity},\n'
        f'  "maps": [\n{rows}\n  ]\n'
        "}\n"
    )


def _schema_error(message: str):
    raise DocumentError("schema", message)


def _int_field(doc: dict, key: str) -> int:
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        _schema_error(f'field "{key}" must be an integer')
    return value


def loads_config(text: str) -> Configuration:
    """Parse and validate a document.

    Slot maps within rounding of the Lorentz group are renormalized; larger
    defects are reported as a ``lorentz`` violation rather than silently
    projected away.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("parse", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        _schema_error("document must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        _schema_error(f"unsupported schema {doc.get('schema')!r}, expected {SCHEMA_VERSION}")
    n = _int_field(doc, "n")
    arity = _int_field(doc, "arity")
    try:
        check_dimension(n)
    except ValueError as exc:
        _schema_error(str(exc))
    if not 1 <= arity <= MAX_ARITY:
        _schema_error(f"arity {arity} outside 1..{MAX_ARITY}")
    maps = doc.get("maps")
    if not isinstance(maps, list) or len(maps) != arity + 1:
        _schema_error(f'"maps" must be a list of {arity + 1} matrices')
    size = (n + 2) ** 2
    matrices = []
    for i, entries in enumerate(maps):
        if (
            not isinstance(entries, list)
            or len(entries) != size
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entries)
        ):
            _schema_error(f"map {i} must list {size} numbers")
        a = np.array(entries, dtype=float).reshape(n + 2, n + 2)
        if not np.all(np.isfinite(a)):
            _schema_error(f"map {i} has non-finite entries")
        matrices.append(a)

    out = []
    for i, a in enumerate(matrices):
        defect = relative_defect(a)
        if i > 0 and not defect <= TOL_LORENTZ:
            raise InvalidConfiguration(
                ValidationReport(False, "lorentz", f"slot {i} has Lorentz defect {defect:.3g}", -defect, (i,))
            )
        try:
            out.append(renormalize(a) if i > 0 else LorentzMap(a))
        except NumericalError as exc:
            raise InvalidConfiguration(ValidationReport(False, "lorentz", f"slot {i}: {exc}", slots=(i,))) from None
    c = Configuration(n, tuple(out))
    report = validate_config(c)
    if not report.ok:
        raise InvalidConfiguration(report)
    return c


def write_config(c: Configuration, path) -> None:
    Path(path).write_text(dumps_config(c), encoding="utf-8")


def read_config(path) -> Configuration:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DocumentError("parse", f"not UTF-8 text: {exc}") from None
    return loads_config(text)
