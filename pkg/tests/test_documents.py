import json

import pytest

from latrec import fixture_path
from latrec.documents import OperatorDocument, dumps, loads
from latrec.errors import DocumentError

OPERATORS = ["kvm", "toda", "rt", "al_r1", "al_r2"]


@pytest.mark.parametrize("name", OPERATORS)
def test_load_save_is_byte_identical(name):
    text = fixture_path(f"{name}.op").read_text()
    assert dumps(loads(text)) == text


def test_document_structure():
    data = json.loads(fixture_path("kvm.op").read_text())
    assert data["schema"] == "latrec.operator" and data["version"] == 1
    kinds = [(e["kind"], e["power"]) for e in data["entries"]]
    assert kinds == [("local", -1), ("local", 0), ("local", 1), ("nonlocal", 0)]
    assert data["entries"][-1]["right"] == "u^-1"


def _doc(entries, variables=("u",)):
    return json.dumps({"schema": "latrec.operator", "version": 1,
                       "variables": list(variables), "entries": entries})


@pytest.mark.parametrize("entries", [
    [{"row": 2, "col": 1, "kind": "local", "power": 0, "coeff": "u"}],
    [{"row": 1, "col": 1, "kind": "sideways", "power": 0, "coeff": "u"}],
    [{"row": 1, "col": 1, "kind": "local", "power": 0}],
    [{"row": 1, "col": 1, "kind": "local", "power": "0", "coeff": "u"}],
    [{"row": 1, "col": 1, "kind": "local", "power": 0, "coeff": "w"}],
    [{"row": 1, "col": 1, "kind": "local", "power": 0, "coeff": "u"},
     {"row": 1, "col": 1, "kind": "local", "power": 0, "coeff": "u"}],
])
def test_malformed_documents(entries):
    with pytest.raises(DocumentError):
        loads(_doc(entries))


def test_bad_json_and_schema():
    with pytest.raises(DocumentError) as info:
        loads("{\n  nope")
    assert info.value.line == 2
    with pytest.raises(DocumentError):
        loads(json.dumps({"schema": "other", "version": 1}))


def test_rational_right_factor_survives():
    doc = loads(fixture_path("al_r1.op").read_text())
    assert isinstance(doc, OperatorDocument)
    rights = {t.right.den for _, _, e in doc.operator.cells() for t in e.nonlocals}
    assert any(d != 1 for d in rights)
