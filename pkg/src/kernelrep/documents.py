"""JSON document format (version "1") for every value the CLI reads or writes.

Top-level documents carry ``kind`` and ``version``; nested values (the
measure spaces and value spaces inside a kernel, say) are bare payload
objects.  Unknown fields are rejected.  Kernel blocks are stored unweighted,
operator blocks carry the domain weight (see :mod:`kernelrep.kernels`).

Three error classes, each with its own code: malformed JSON
(``E_SYNTAX``, with line number), wrong structure or types (``E_SCHEMA``,
with field path) and violated invariants such as nonpositive weights
(``E_INVARIANT``).
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from . import norms
from .errors import (DocumentError, DocumentSyntaxError, InvalidSpace, InvariantError,
                     KernelRepError, SchemaError)
from .kernels import Kernel
from .multiplication import Multiplier
from .operators import BlockOperator
from .spaces import LpFunction, MeasureSpace, SpaceSpec
from .tensor import FunctionFactor, TensorElement

VERSION = "1"
KINDS = ("measure_space", "space_spec", "kernel", "operator", "multiplier",
         "tensor_element", "function", "report")


# -- reading --------------------------------------------------------------------

def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def loads(text) -> dict:
    """Parse JSON text into a dict, mapping every failure to ``E_SYNTAX``."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentSyntaxError(f"input is not UTF-8 ({exc.reason})") from None
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, line=exc.lineno) from None
    except ValueError as exc:
        raise DocumentSyntaxError(str(exc)) from None
    if not isinstance(data, dict):
        raise SchemaError("a document must be a JSON object")
    return data


def _fields(obj, path, required, optional=()):
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", path)
    for key in obj:
        if key not in required and key not in optional:
            raise SchemaError("unknown field", _join(path, key))
    for key in required:
        if key not in obj:
            raise SchemaError("missing field", _join(path, key))


def _join(path, key):
    return f"{path}.{key}" if path else str(key)


def _number(x, path) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError("expected a number", path)
    x = float(x)
    if not math.isfinite(x):
        raise SchemaError("number out of range", path)
    return x


def _array(obj, path, shape) -> np.ndarray:
    """Nested lists of numbers with exactly the given shape."""
    def walk(x, p, depth):
        if depth == len(shape):
            return _number(x, p)
        if not isinstance(x, list):
            raise SchemaError("expected a list", p)
        if len(x) != shape[depth]:
            raise SchemaError(f"expected length {shape[depth]}, got {len(x)}", p)
        return [walk(v, f"{p}[{i}]", depth + 1) for i, v in enumerate(x)]
    return np.array(walk(obj, path, 0), dtype=float).reshape(shape)


def _string(x, path, choices=None) -> str:
    if not isinstance(x, str):
        raise SchemaError("expected a string", path)
    if choices is not None and x not in choices:
        raise SchemaError(f"expected one of {list(choices)}", path)
    return x


def _int(x, path) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError("expected an integer", path)
    return x


def _bool(x, path) -> bool:
    if not isinstance(x, bool):
        raise SchemaError("expected a boolean", path)
    return x


def _measure_space(obj, path) -> MeasureSpace:
    _fields(obj, path, ("atoms", "weights"))
    atoms = obj["atoms"]
    if not isinstance(atoms, list):
        raise SchemaError("expected a list", _join(path, "atoms"))
    for i, a in enumerate(atoms):
        if isinstance(a, bool) or not isinstance(a, (str, int)):
            raise SchemaError("atom identifiers must be strings or integers",
                              f"{_join(path, 'atoms')}[{i}]")
    weights = obj["weights"]
    if not isinstance(weights, list):
        raise SchemaError("expected a list", _join(path, "weights"))
    w = _array(weights, _join(path, "weights"), (len(weights),))
    if len(w) != len(atoms):
        raise SchemaError(f"expected {len(atoms)} weights", _join(path, "weights"))
    try:
        return MeasureSpace(tuple(atoms), w)
    except InvalidSpace as exc:
        raise InvariantError(str(exc), path) from None


def _space_spec(obj, path) -> SpaceSpec:
    _fields(obj, path, ("dim", "norm"), ("ordered",))
    dim = _int(obj["dim"], _join(path, "dim"))
    if dim < 1:
        raise InvariantError("dim must be positive", _join(path, "dim"))
    norm = _string(obj["norm"], _join(path, "norm"), norms.NORM_TAGS)
    ordered = _bool(obj.get("ordered", False), _join(path, "ordered"))
    return SpaceSpec(dim, norm, ordered)


def _exponent(obj, path) -> str:
    return _string(obj, path, norms.NORM_TAGS)


def _kernel(obj, path) -> Kernel:
    _fields(obj, path, ("space1", "space2", "domain_spec", "codomain_spec", "blocks"))
    s1 = _measure_space(obj["space1"], _join(path, "space1"))
    s2 = _measure_space(obj["space2"], _join(path, "space2"))
    e = _space_spec(obj["domain_spec"], _join(path, "domain_spec"))
    f = _space_spec(obj["codomain_spec"], _join(path, "codomain_spec"))
    blocks = _array(obj["blocks"], _join(path, "blocks"), (len(s1), len(s2), f.dim, e.dim))
    return Kernel(s1, s2, e, f, blocks)


def _operator(obj, path) -> BlockOperator:
    _fields(obj, path, ("domain_space", "domain_spec", "domain_exponent", "codomain_space",
                        "codomain_spec", "codomain_exponent", "blocks"))
    s1 = _measure_space(obj["domain_space"], _join(path, "domain_space"))
    e = _space_spec(obj["domain_spec"], _join(path, "domain_spec"))
    p = _exponent(obj["domain_exponent"], _join(path, "domain_exponent"))
    s2 = _measure_space(obj["codomain_space"], _join(path, "codomain_space"))
    g = _space_spec(obj["codomain_spec"], _join(path, "codomain_spec"))
    q = _exponent(obj["codomain_exponent"], _join(path, "codomain_exponent"))
    blocks = _array(obj["blocks"], _join(path, "blocks"), (len(s2), len(s1), g.dim, e.dim))
    return BlockOperator(s1, e, p, s2, g, q, blocks)


def _multiplier(obj, path) -> Multiplier:
    _fields(obj, path, ("space", "spec", "blocks"))
    s = _measure_space(obj["space"], _join(path, "space"))
    spec = _space_spec(obj["spec"], _join(path, "spec"))
    blocks = _array(obj["blocks"], _join(path, "blocks"), (len(s), spec.dim, spec.dim))
    return Multiplier(s, spec, blocks)


def _function(obj, path) -> LpFunction:
    _fields(obj, path, ("space", "spec", "exponent", "values"))
    s = _measure_space(obj["space"], _join(path, "space"))
    spec = _space_spec(obj["spec"], _join(path, "spec"))
    p = _exponent(obj["exponent"], _join(path, "exponent"))
    values = _array(obj["values"], _join(path, "values"), (len(s), spec.dim))
    return LpFunction(s, spec, values, p)


def _factor(obj, path):
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", path)
    kind = _string(obj.get("type"), _join(path, "type"), ("space_spec", "function_space"))
    if kind == "space_spec":
        _fields(obj, path, ("type", "dim", "norm"), ("ordered",))
        return _space_spec({k: v for k, v in obj.items() if k != "type"}, path)
    _fields(obj, path, ("type", "space", "exponent"))
    return FunctionFactor(_measure_space(obj["space"], _join(path, "space")),
                          _exponent(obj["exponent"], _join(path, "exponent")))


def _tensor(obj, path) -> TensorElement:
    _fields(obj, path, ("factors", "coefficients"))
    raw = obj["factors"]
    if not isinstance(raw, list) or not raw:
        raise SchemaError("expected a non-empty list", _join(path, "factors"))
    factors = tuple(_factor(f, f"{_join(path, 'factors')}[{i}]") for i, f in enumerate(raw))
    shape = tuple(f.dim for f in factors)
    return TensorElement(factors, _array(obj["coefficients"], _join(path, "coefficients"),
                                         shape))


_PARSERS = {
    "measure_space": _measure_space,
    "space_spec": _space_spec,
    "kernel": _kernel,
    "operator": _operator,
    "multiplier": _multiplier,
    "tensor_element": _tensor,
    "function": _function,
}


def from_dict(data: dict, unwrap_reports: bool = True):
    """Domain value for a parsed document; reports yield their ``output``."""
    if not isinstance(data, dict):
        raise SchemaError("a document must be a JSON object")
    kind = _string(data.get("kind"), "kind", KINDS)
    version = data.get("version")
    if version != VERSION:
        raise SchemaError(f"unsupported version {version!r}; expected {VERSION!r}", "version")
    if kind == "report":
        if not unwrap_reports or not isinstance(data.get("output"), dict):
            raise SchemaError("report carries no output document", "output")
        return from_dict(data["output"], unwrap_reports=False)
    payload = {k: v for k, v in data.items() if k not in ("kind", "version")}
    try:
        return _PARSERS[kind](payload, "")
    except DocumentError:
        raise
    except KernelRepError as exc:
        raise InvariantError(str(exc)) from None


def parse_document(text):
    """Strict parse of UTF-8 JSON text into one domain value."""
    return from_dict(loads(text))


# -- writing --------------------------------------------------------------------

def _atoms(space: MeasureSpace):
    out = []
    for a in space.atoms:
        if isinstance(a, (str, int)) and not isinstance(a, bool):
            out.append(a)
        else:
            out.append(str(a))
    return out


def space_payload(space: MeasureSpace) -> dict:
    return {"atoms": _atoms(space), "weights": space.weights.tolist()}


def spec_payload(spec: SpaceSpec) -> dict:
    return {"dim": spec.dim, "norm": spec.norm, "ordered": spec.ordered}


def _factor_payload(f) -> dict:
    if isinstance(f, SpaceSpec):
        return {"type": "space_spec", **spec_payload(f)}
    if isinstance(f, FunctionFactor):
        return {"type": "function_space", "space": space_payload(f.space),
                "exponent": f.exponent}
    raise SchemaError(f"cannot serialise factor {f!r}")


def to_dict(value) -> dict:
    if isinstance(value, MeasureSpace):
        kind, payload = "measure_space", space_payload(value)
    elif isinstance(value, SpaceSpec):
        kind, payload = "space_spec", spec_payload(value)
    elif isinstance(value, Kernel):
        kind, payload = "kernel", {
            "space1": space_payload(value.space1), "space2": space_payload(value.space2),
            "domain_spec": spec_payload(value.domain_spec),
            "codomain_spec": spec_payload(value.codomain_spec),
            "blocks": value.blocks.tolist()}
    elif isinstance(value, BlockOperator):
        kind, payload = "operator", {
            "domain_space": space_payload(value.domain_space),
            "domain_spec": spec_payload(value.domain_spec),
            "domain_exponent": value.domain_exponent,
            "codomain_space": space_payload(value.codomain_space),
            "codomain_spec": spec_payload(value.codomain_spec),
            "codomain_exponent": value.codomain_exponent,
            "blocks": value.blocks.tolist()}
    elif isinstance(value, Multiplier):
        kind, payload = "multiplier", {
            "space": space_payload(value.space), "spec": spec_payload(value.spec),
            "blocks": value.blocks.tolist()}
    elif isinstance(value, TensorElement):
        kind, payload = "tensor_element", {
            "factors": [_factor_payload(f) for f in value.factors],
            "coefficients": value.coefficients.tolist()}
    elif isinstance(value, LpFunction):
        kind, payload = "function", {
            "space": space_payload(value.space), "spec": spec_payload(value.spec),
            "exponent": value.exponent, "values": value.values.tolist()}
    else:
        raise TypeError(f"no document kind for {type(value).__name__}")
    return {"kind": kind, "version": VERSION, **payload}


def dumps(data: dict) -> str:
    """Canonical text: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False,
                      ensure_ascii=False) + "\n"


def serialize(value) -> str:
    return dumps(to_dict(value))


def digest(data: dict) -> str:
    """SHA-256 of the canonical form, so field order does not matter."""
    return "sha256:" + hashlib.sha256(dumps(data).encode("utf-8")).hexdigest()


__all__ = ["VERSION", "KINDS", "loads", "from_dict", "parse_document", "to_dict", "dumps",
           "serialize", "digest", "space_payload", "spec_payload"]
