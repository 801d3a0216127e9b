"""JSON operator documents.

Entries carry 1-based ``row``/``col``, ``kind`` (``local`` or ``nonlocal``)
and ``power``.  Local entries hold ``coeff`` (the factor in front of D^power);
nonlocal entries hold ``left`` and ``right`` for left * Delta^-1 * right * D^power.
All expressions use the system DSL.  ``dumps`` is canonical: sorted keys,
two-space indent, trailing newline, entries in matrix order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Tuple

from .dsl import format_expression, format_rational, parse_expression, parse_rational
from .errors import DocumentError
from .opalgebra import Entry, Nonlocal, PseudoDifferenceOperator

SCHEMA = "latrec.operator"
VERSION = 1


@dataclass(frozen=True)
class OperatorDocument:
    variables: Tuple[str, ...]
    operator: PseudoDifferenceOperator

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.operator.N != len(self.variables):
            raise DocumentError("operator size does not match the variable list")


def to_dict(doc: OperatorDocument) -> dict:
    names = doc.variables
    entries = []
    for i, j, e in doc.operator.cells():
        for k, c in e.locals.items():
            entries.append({"row": i + 1, "col": j + 1, "kind": "local", "power": k,
                            "coeff": format_expression(c, names)})
        for t in e.nonlocals:
            entries.append({"row": i + 1, "col": j + 1, "kind": "nonlocal", "power": t.power,
                            "left": format_expression(t.left, names),
                            "right": format_rational(t.right, names)})
    return {"schema": SCHEMA, "version": VERSION, "variables": list(names), "entries": entries}


def dumps(doc: OperatorDocument) -> str:
    return json.dumps(to_dict(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _field(entry: dict, key: str, kind, idx: int):
    if key not in entry:
        raise DocumentError(f"entry {idx}: missing field {key!r}")
    v = entry[key]
    if kind is int and (isinstance(v, bool) or not isinstance(v, int)):
        raise DocumentError(f"entry {idx}: {key!r} must be an integer")
    if kind is str and not isinstance(v, str):
        raise DocumentError(f"entry {idx}: {key!r} must be a string")
    return v


def _parse_in_entry(fn, text, names, idx, key):
    try:
        return fn(text, names)
    except DocumentError as exc:
        raise type(exc)(f"entry {idx}, field {key!r}: {exc}") from exc


def from_dict(data: dict) -> OperatorDocument:
    if not isinstance(data, dict):
        raise DocumentError("operator document must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise DocumentError(f"not an operator document (schema {data.get('schema')!r})")
    if data.get("version") != VERSION:
        raise DocumentError(f"unsupported operator document version {data.get('version')!r}")
    names = data.get("variables")
    if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
        raise DocumentError("'variables' must be a non-empty list of names")
    n = len(names)
    locals_ = [[{} for _ in range(n)] for _ in range(n)]
    nonlocals = [[[] for _ in range(n)] for _ in range(n)]
    entries = data.get("entries")
    if not isinstance(entries, list):
        raise DocumentError("'entries' must be a list")
    for idx, entry in enumerate(entries, start=1):
        if not isinstance(entry, dict):
            raise DocumentError(f"entry {idx}: must be an object")
        row, col = _field(entry, "row", int, idx), _field(entry, "col", int, idx)
        if not (1 <= row <= n and 1 <= col <= n):
            raise DocumentError(f"entry {idx}: position ({row}, {col}) outside a {n}x{n} matrix")
        power = _field(entry, "power", int, idx)
        kind = _field(entry, "kind", str, idx)
        if kind == "local":
            coeff = _parse_in_entry(parse_expression, _field(entry, "coeff", str, idx), names, idx, "coeff")
            cell = locals_[row - 1][col - 1]
            if power in cell:
                raise DocumentError(f"entry {idx}: duplicate local power {power} at ({row}, {col})")
            cell[power] = coeff
        elif kind == "nonlocal":
            left = _parse_in_entry(parse_expression, _field(entry, "left", str, idx), names, idx, "left")
            right = _parse_in_entry(parse_rational, _field(entry, "right", str, idx), names, idx, "right")
            nonlocals[row - 1][col - 1].append(Nonlocal(left, right, power))
        else:
            raise DocumentError(f"entry {idx}: kind must be 'local' or 'nonlocal', not {kind!r}")
    op = PseudoDifferenceOperator([[Entry(locals_[i][j], nonlocals[i][j]) for j in range(n)]
                                   for i in range(n)])
    return OperatorDocument(tuple(names), op)


def loads(text: str) -> OperatorDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    return from_dict(data)


def load(path) -> OperatorDocument:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(doc: OperatorDocument, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(doc))


def operator_for(variables: Sequence[str], op: PseudoDifferenceOperator) -> OperatorDocument:
    return OperatorDocument(tuple(variables), op)
