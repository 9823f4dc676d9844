import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_kernel, random_operator, random_space
from kernelrep import documents as docs
from kernelrep.errors import DocumentSyntaxError, InvariantError, SchemaError
from kernelrep.multiplication import Multiplier
from kernelrep.spaces import LpFunction, MeasureSpace, SpaceSpec
from kernelrep.tensor import FunctionFactor, TensorElement

MINIMAL = '{"kind":"measure_space","version":"1","atoms":["a"],"weights":[1.0]}'


def test_minimal_measure_space():
    s = docs.parse_document(MINIMAL.encode())
    assert s == MeasureSpace(("a",), [1.0])


def test_zero_weight_is_invariant_error():
    with pytest.raises(InvariantError) as err:
        docs.parse_document(MINIMAL.replace("1.0", "0.0"))
    assert err.value.code == "E_INVARIANT"


def test_bad_block_shape_is_schema_error():
    k = random_kernel(np.random.default_rng(0), dims=(2, 2))
    d = docs.to_dict(k)
    d["blocks"][0][0] = [[1.0, 2.0]]
    with pytest.raises(SchemaError) as err:
        docs.from_dict(d)
    assert err.value.code == "E_SCHEMA" and err.value.path == "blocks[0][0]"


def test_syntax_error_has_line():
    with pytest.raises(DocumentSyntaxError) as err:
        docs.loads('{\n"kind": "measure_space",\n"version": 1,,\n}')
    assert err.value.code == "E_SYNTAX" and err.value.line == 3


@pytest.mark.parametrize("text,cls", [
    (b"\xff\xfe", DocumentSyntaxError),
    ('{"kind":"measure_space","version":"1","atoms":["a"],"weights":[NaN]}',
     DocumentSyntaxError),
    ("[1, 2]", SchemaError),
    (MINIMAL.replace('"1"', '"2"'), SchemaError),
    (MINIMAL.replace("measure_space", "matrix"), SchemaError),
    (MINIMAL.replace('"atoms"', '"extra":0,"atoms"'), SchemaError),
    (MINIMAL.replace(',"weights":[1.0]', ""), SchemaError),
    (MINIMAL.replace("[1.0]", "[true]"), SchemaError),
    (MINIMAL.replace("[1.0]", '["1.0"]'), SchemaError),
    (MINIMAL.replace("[1.0]", "[1.0, 2.0]"), SchemaError),
    (MINIMAL.replace('["a"]', '[["a"]]'), SchemaError),
    (MINIMAL.replace('["a"]', '["a","a"]').replace("[1.0]", "[1.0,1.0]"), InvariantError),
    (MINIMAL.replace("[1.0]", "[-2]"), InvariantError),
    ('{"kind":"space_spec","version":"1","dim":0,"norm":"p1"}', InvariantError),
    ('{"kind":"space_spec","version":"1","dim":2,"norm":"p3"}', SchemaError),
    ('{"kind":"space_spec","version":"1","dim":2.0,"norm":"p1"}', SchemaError),
])
def test_strict_rejections(text, cls):
    with pytest.raises(cls):
        docs.parse_document(text)


def _values(rng):
    s = random_space(rng)
    spec = SpaceSpec(2, "p2", ordered=True)
    yield s
    yield spec
    yield random_kernel(rng)
    yield random_operator(rng)
    yield Multiplier(s, spec, rng.standard_normal((len(s), 2, 2)))
    yield LpFunction(s, spec, rng.standard_normal((len(s), 2)), "pinf")
    yield TensorElement((FunctionFactor(s, "p1"), SpaceSpec(3, "pinf")),
                        rng.standard_normal((len(s), 3)))


def test_round_trip_all_kinds():
    rng = np.random.default_rng(1)
    for _ in range(20):
        for v in _values(rng):
            text = docs.serialize(v)
            back = docs.parse_document(text)
            assert back == v
            assert docs.serialize(back) == text


def test_round_trip_is_field_order_independent():
    rng = np.random.default_rng(2)
    d = docs.to_dict(random_kernel(rng))
    shuffled = dict(reversed(list(d.items())))
    shuffled["space1"] = dict(reversed(list(d["space1"].items())))
    assert docs.digest(shuffled) == docs.digest(d)
    assert docs.dumps(docs.to_dict(docs.from_dict(shuffled))) == docs.dumps(d)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1,
                max_size=6))
def test_floats_round_trip_exactly(xs):
    s = MeasureSpace.from_weights([1.0] * len(xs))
    f = LpFunction(s, SpaceSpec(1), np.array(xs)[:, None])
    back = docs.parse_document(docs.serialize(f))
    assert back.values.ravel().tolist() == [float(x) for x in xs]


def test_integer_atoms_survive():
    s = MeasureSpace((3, "b", 0), [1.0, 2.0, 0.5])
    assert docs.parse_document(docs.serialize(s)).atoms == (3, "b", 0)


def test_report_unwraps_output():
    k = random_kernel(np.random.default_rng(3))
    report = {"kind": "report", "version": "1", "command": "represent", "inputs": [],
              "results": {}, "witnesses": {}, "output": docs.to_dict(k), "status": "pass"}
    assert docs.parse_document(json.dumps(report)) == k
    report["output"] = None
    with pytest.raises(SchemaError):
        docs.parse_document(json.dumps(report))


def test_nested_errors_name_the_field():
    d = docs.to_dict(random_operator(np.random.default_rng(4)))
    d["codomain_space"]["weights"][0] = 0.0
    with pytest.raises(InvariantError) as err:
        docs.from_dict(d)
    assert err.value.path == "codomain_space"
    d = docs.to_dict(random_operator(np.random.default_rng(4)))
    d["domain_spec"]["norm"] = "l2"
    with pytest.raises(SchemaError) as err:
        docs.from_dict(d)
    assert err.value.path == "domain_spec.norm"
