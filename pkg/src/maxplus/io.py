"""JSON instance files: schemas, loaders, writers and stable digests.

Arrays are ``{"kind": "array", "size": [...], "data": [...]}`` with ``data``
in linear-index order (dimension 1 fastest) and ``null`` for NEG_INF.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Union

import jsonschema

from .ilp import IlpInstance, IlpResult
from .knapsack import Item, KnapsackInstance, Semantics, SolutionArray, Variant
from .mdarray import INT64_MAX, INT64_MIN, MDArray

PathLike = Union[str, Path]


class InputError(ValueError):
    """A file could not be parsed or does not match its schema."""


_INT = {"type": "integer", "minimum": INT64_MIN + 1, "maximum": INT64_MAX}
_NAT = {"type": "integer", "minimum": 0, "maximum": INT64_MAX}
_INTVEC = {"type": "array", "items": _INT}
_NATVEC = {"type": "array", "items": _NAT}
_SIZE = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}

_ARRAY_BODY = {
    "type": "object",
    "required": ["size", "data"],
    "properties": {
        "kind": {"const": "array"},
        "size": _SIZE,
        "data": {"type": "array", "items": {"anyOf": [_INT, {"type": "null"}]}},
        "semantics": {"enum": [s.value for s in Semantics]},
    },
}

SCHEMAS: dict[str, dict] = {
    "array": {**_ARRAY_BODY, "required": ["kind", "size", "data"]},
    "conv": {
        "type": "object",
        "required": ["kind", "A", "B"],
        "properties": {
            "kind": {"const": "conv"},
            "A": _ARRAY_BODY,
            "B": _ARRAY_BODY,
            "C": _ARRAY_BODY,  # upper-bound candidate, used by the block reduction
            "out_size": _SIZE,
        },
    },
    "knapsack": {
        "type": "object",
        "required": ["kind", "t", "items"],
        "properties": {
            "kind": {"const": "knapsack"},
            "d": {"type": "integer", "minimum": 1},
            "t": {**_NATVEC, "minItems": 1},
            "variant": {"enum": [v.value for v in Variant]},
            "items": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["w", "p"],
                    "properties": {
                        "w": _NATVEC,
                        "p": _INT,
                        "bound": {"anyOf": [{"type": "integer", "minimum": 0}, {"type": "null"}]},
                    },
                    "additionalProperties": False,
                },
            },
        },
    },
    "ilp": {
        "type": "object",
        "required": ["kind", "A", "b", "c", "u"],
        "properties": {
            "kind": {"const": "ilp"},
            "A": {"type": "array", "items": _INTVEC},
            "b": _INTVEC,
            "c": _INTVEC,
            "l": _INTVEC,
            "u": _INTVEC,
        },
    },
    "ilp_result": {
        "type": "object",
        "required": ["kind", "status"],
        "properties": {
            "kind": {"const": "ilp_result"},
            "status": {"enum": ["OPTIMAL", "INFEASIBLE", "UNBOUNDED"]},
            "x": {"anyOf": [_INTVEC, {"type": "null"}]},
            "value": {"anyOf": [_INT, {"type": "null"}]},
        },
    },
}


def validate(doc: Any, kind: str) -> None:
    if not isinstance(doc, dict) or doc.get("kind") != kind:
        got = doc.get("kind") if isinstance(doc, dict) else type(doc).__name__
        raise InputError(f"expected a {kind!r} document, got {got!r}")
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise InputError(f"invalid {kind} document: {exc.message}") from exc


def read_json(path: PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def canonical(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def digest(doc: Any) -> str:
    return hashlib.sha256(canonical(doc).encode()).hexdigest()


def write_json(doc: Any, path: PathLike) -> None:
    Path(path).write_text(canonical(doc) + "\n", encoding="utf-8")


# -- arrays -----------------------------------------------------------------


def array_to_doc(A: MDArray, semantics: Semantics | None = None) -> dict:
    doc = {"kind": "array", "size": list(A.size), "data": _plain(A)}
    if semantics is not None:
        doc["semantics"] = semantics.value
    return doc


def _plain(A: MDArray) -> list:
    return [None if not isinstance(v, int) else v for v in A.values()]


def array_from_doc(doc: dict) -> MDArray:
    size = doc["size"]
    data = doc["data"]
    total = 1
    for s in size:
        total *= s
    if len(data) != total:
        raise InputError(f"array of size {size} needs {total} entries, got {len(data)}")
    return MDArray.from_values(size, data)


def load_array(path: PathLike) -> MDArray:
    doc = read_json(path)
    validate(doc, "array")
    return array_from_doc(doc)


def conv_to_doc(A: MDArray, B: MDArray, out_size=None) -> dict:
    doc = {"kind": "conv", "A": array_to_doc(A), "B": array_to_doc(B)}
    for part in (doc["A"], doc["B"]):
        part.pop("kind")
    if out_size is not None:
        doc["out_size"] = list(out_size)
    return doc


def load_conv(path: PathLike) -> tuple[MDArray, MDArray, tuple[int, ...] | None]:
    doc = read_json(path)
    validate(doc, "conv")
    A, B = array_from_doc(doc["A"]), array_from_doc(doc["B"])
    out = tuple(doc["out_size"]) if "out_size" in doc else None
    return A, B, out


def solution_to_doc(sol: SolutionArray) -> dict:
    return array_to_doc(sol.array, sol.semantics)


# -- knapsack ---------------------------------------------------------------


def knapsack_to_doc(inst: KnapsackInstance) -> dict:
    return {
        "kind": "knapsack",
        "d": inst.d,
        "t": list(inst.capacity),
        "variant": inst.variant.value,
        "items": [{"w": list(it.weight), "p": it.profit, "bound": it.bound} for it in inst.items],
    }


def knapsack_from_doc(doc: dict) -> KnapsackInstance:
    t = tuple(doc["t"])
    if "d" in doc and doc["d"] != len(t):
        raise InputError(f"d = {doc['d']} but t has {len(t)} entries")
    variant = Variant(doc.get("variant", Variant.BOUNDED.value))
    items = []
    for it in doc["items"]:
        if len(it["w"]) != len(t):
            raise InputError(f"item weight {it['w']} does not match dimension {len(t)}")
        items.append(Item(tuple(it["w"]), it["p"], it.get("bound", 1)))
    try:
        return KnapsackInstance(items, t, variant)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def load_knapsack(path: PathLike) -> KnapsackInstance:
    doc = read_json(path)
    validate(doc, "knapsack")
    return knapsack_from_doc(doc)


# -- ilp ----------------------------------------------------------------------


def ilp_to_doc(inst: IlpInstance) -> dict:
    return {
        "kind": "ilp",
        "A": [list(r) for r in inst.A],
        "b": list(inst.b),
        "c": list(inst.c),
        "l": list(inst.lower),
        "u": list(inst.upper),
    }


def ilp_from_doc(doc: dict) -> IlpInstance:
    try:
        return IlpInstance(doc["A"], doc["b"], doc["c"], doc.get("l"), doc["u"])
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def load_ilp(path: PathLike) -> IlpInstance:
    doc = read_json(path)
    validate(doc, "ilp")
    return ilp_from_doc(doc)


def ilp_result_to_doc(res: IlpResult) -> dict:
    return {
        "kind": "ilp_result",
        "status": res.status.value,
        "x": list(res.x) if res.x is not None else None,
        "value": res.value,
    }


LOADERS = {
    "array": array_from_doc,
    "knapsack": knapsack_from_doc,
    "ilp": ilp_from_doc,
}
