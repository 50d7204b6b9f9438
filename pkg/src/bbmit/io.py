"""Instance files and report emission.

Instance files are JSON.  Two kinds exist:

* identity-testing instances ``{"ring": ..., "basis": [...], "polynomial": {...}}``
  with element literals per ring and 1-based variable indices;
* split-collision instances ``{"k": 4, "m": 2, "f": [2, 1, 2, 4]}`` with a
  1-based function table.

Structure is checked against ``schemas/instance.schema.json`` with
``jsonschema``; cross-field constraints (variable ranges, element literals,
table values) are checked here.  Internally everything is 0-based.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Union

import jsonschema
import numpy as np

from .errors import InvalidElement, MalformedInstance, ParseError, ReportError, SchemaError
from .polynomial import Const, MultilinearPolynomial, Term, Var
from .reduction import ReductionOutput, SplitCollisionInstance
from .ring import AdditiveBasis, BlackBoxRing, ring_from_spec


@dataclass(frozen=True)
class MITInstance:
    """A multilinear identity testing instance: ring, generators, polynomial."""

    ring: BlackBoxRing
    basis: AdditiveBasis
    polynomial: MultilinearPolynomial


Instance = Union[MITInstance, SplitCollisionInstance]


@lru_cache(maxsize=1)
def instance_schema() -> dict:
    text = resources.files("bbmit").joinpath("schemas/instance.schema.json").read_text()
    return json.loads(text)


def _field(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _validate(data: Any, definition: str) -> None:
    schema = instance_schema()
    sub = {"$ref": f"#/$defs/{definition}", "$defs": schema["$defs"]}
    validator = jsonschema.Draft202012Validator(sub)
    error = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if error is not None:
        raise SchemaError(error.message, _field(error.absolute_path))


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def polynomial_from_json(data: dict, ring: BlackBoxRing, field: str = "polynomial") -> MultilinearPolynomial:
    _validate(data, "polynomial")
    m = data["m"]
    terms = []
    for ti, t in enumerate(data["terms"]):
        atoms = []
        for ai, a in enumerate(t["atoms"]):
            where = f"{field}.terms[{ti}].atoms[{ai}]"
            if "var" in a:
                if a["var"] > m:
                    raise SchemaError(f"variable {a['var']} exceeds m={m}", f"{where}.var")
                atoms.append(Var(a["var"] - 1))
            else:
                try:
                    atoms.append(Const(ring.from_literal(a["const"])))
                except InvalidElement as e:
                    raise SchemaError(str(e), f"{where}.const") from None
        terms.append(Term(tuple(atoms), t.get("sign", 1)))
    return MultilinearPolynomial(m, tuple(terms), data.get("mode", "noncommuting"))


def polynomial_to_json(poly: MultilinearPolynomial, ring: BlackBoxRing) -> dict:
    terms = []
    for t in poly.terms:
        atoms = [{"var": a.index + 1} if isinstance(a, Var) else {"const": ring.to_literal(a.value)}
                 for a in t.atoms]
        terms.append({"sign": t.sign, "atoms": atoms})
    return {"m": poly.m, "mode": poly.mode, "terms": terms}


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

def instance_from_json(data: Any) -> Instance:
    """Build an in-memory instance from decoded JSON."""
    if not isinstance(data, dict):
        raise SchemaError("instance must be a JSON object", "")
    if "ring" in data or "polynomial" in data:
        _validate(data, "mit_instance")
        ring = ring_from_spec(data["ring"])
        gens = []
        for i, lit in enumerate(data["basis"]):
            try:
                gens.append(ring.from_literal(lit))
            except InvalidElement as e:
                raise SchemaError(str(e), f"basis[{i}]") from None
        poly = polynomial_from_json(data["polynomial"], ring)
        return MITInstance(ring, AdditiveBasis.build(ring, gens), poly)
    _validate(data, "split_instance")
    k, m, f = data["k"], data["m"], data["f"]
    if len(f) != k:
        raise SchemaError(f"function table has {len(f)} entries, expected k={k}", "f")
    for i, v in enumerate(f):
        if v > k:
            raise SchemaError(f"value {v} outside the domain [1, {k}]", f"f[{i}]")
    try:
        return SplitCollisionInstance(k, m, tuple(v - 1 for v in f))
    except MalformedInstance as e:
        raise SchemaError(str(e), "m") from None


def loads_instance(text: str, path: str | None = None) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path, e.lineno, e.colno) from None
    return instance_from_json(data)


def parse_instance(path: str | Path) -> Instance:
    """Read and validate an instance file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(e.strerror or str(e), str(path)) from None
    return loads_instance(text, str(path))


def instance_to_json(inst: Instance | ReductionOutput) -> dict:
    if isinstance(inst, ReductionOutput):
        inst = MITInstance(inst.ring, inst.basis, inst.polynomial)
    if isinstance(inst, SplitCollisionInstance):
        return {"k": inst.k, "m": inst.m, "f": [v + 1 for v in inst.f]}
    ring = inst.ring
    return {
        "ring": ring.spec(),
        "basis": [ring.to_literal(g) for g in inst.basis.generators],
        "polynomial": polynomial_to_json(inst.polynomial, ring),
    }


def dumps_instance(inst: Instance | ReductionOutput) -> str:
    return json.dumps(instance_to_json(inst), sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def to_jsonable(obj: Any) -> Any:
    """Plain JSON values; rationals become {"num", "den"} pairs."""
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, str, int)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, bytes):
        return obj.hex()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset, np.ndarray)):
        items = list(obj) if not isinstance(obj, (set, frozenset)) else sorted(obj)
        return [to_jsonable(v) for v in items]
    raise ReportError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(to_jsonable(v), sort_keys=True, separators=(",", ":"))
    return str(to_jsonable(v))


def _flatten(prefix: str, v: Any, out: list) -> None:
    if isinstance(v, dict):
        for k in sorted(v):
            _flatten(f"{prefix}.{k}" if prefix else str(k), v[k], out)
    else:
        out.append((prefix, v))


def emit_report(report: dict, fmt: str = "json") -> bytes:
    """Serialize a report deterministically.

    JSON uses sorted keys.  CSV emits ``report["table"]`` (fixed ``columns``
    then ``rows``) when present, otherwise a ``field,value`` listing of the
    flattened report.
    """
    config = report.get("config")
    if not isinstance(config, dict) or "seed" not in config:
        raise ReportError("report config must record the seed")
    if fmt == "json":
        return (json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n").encode()
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        table = report.get("table")
        if table is not None:
            cols = list(table["columns"])
            w.writerow(cols)
            for row in table["rows"]:
                w.writerow([_csv_cell(row.get(c)) for c in cols])
        else:
            w.writerow(["field", "value"])
            flat: list = []
            _flatten("", report, flat)
            for k, v in flat:
                w.writerow([k, _csv_cell(v)])
        return buf.getvalue().encode()
    raise ReportError(f"unknown output format {fmt!r}")
