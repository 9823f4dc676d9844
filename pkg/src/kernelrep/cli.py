"""Command-line front end: ``kernelrep <command> [flags] <input files...>``.

Every command writes exactly one JSON document to standard output: a report
on success or failure, an error document on bad input.  Exit status is 0
for ``pass`` (and ``approx``, a certified interval), 1 for ``fail`` and 2
for input errors.  ``-`` reads a document from standard input, and a report
given as input stands for the document in its ``output`` field, so
producing commands can be piped into checking commands.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import documents as docs
from .errors import KernelRepError, NonLocalError, NotExactError
from .hilbert_schmidt import check_hs_isometry, hs_norm_kernel, hs_norm_operator
from .kernels import (Kernel, check_isometry, extract_density, kernel_apply,
                      kernel_to_operator, operator_to_kernel, sup_norm)
from .multiplication import (Multiplier, check_multiplier_norm, check_multiplier_positivity,
                             extract_multiplier, is_local, multiplier_apply,
                             multiplier_to_operator)
from .multiplication import sup_norm as multiplier_sup_norm
from .operators import BlockOperator, apply, operator_norm
from .order import (check_regular_kernel_correspondence, counterexample_sequence,
                    is_positive_function, is_positive_kernel, is_positive_operator,
                    positivity_witness, regular_norm)
from .spaces import LpFunction
from .tensor import (FunctionFactor, TensorElement, check_commutativity,
                     check_l1_product_identity, pi_norm)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(KernelRepError):
    code = "E_USAGE"


@dataclass
class Report:
    command: str
    inputs: list
    results: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    output: Optional[dict] = None
    status: object = "pass"

    def add(self, name, value, tolerance=0.0):
        if isinstance(value, (bool, np.bool_)):
            self.results[name] = {"value": bool(value), "tolerance": None}
        else:
            self.results[name] = {"value": float(value), "tolerance": float(tolerance)}

    def check(self, ok: bool):
        """Downgrade to ``fail`` when ``ok`` is false."""
        if not ok:
            self.status = "fail"

    def to_dict(self) -> dict:
        return {"kind": "report", "version": docs.VERSION, "command": self.command,
                "inputs": self.inputs, "results": self.results,
                "witnesses": self.witnesses, "output": self.output,
                "status": self.status}

    @property
    def exit_code(self) -> int:
        return EXIT_FAIL if self.status == "fail" else EXIT_PASS


def _expect(value, *types, what="input"):
    if not isinstance(value, types):
        names = " or ".join(t.__name__ for t in types)
        raise UsageError(f"{what} must be a {names}, got {type(value).__name__}")
    return value


# -- commands ---------------------------------------------------------------------
# Each takes (report, values, args) and fills the report in place.

def cmd_represent(rep, values, args):
    T = _expect(values[0], BlockOperator)
    k = operator_to_kernel(T)
    back = kernel_to_operator(k, T.domain_exponent, T.codomain_exponent)
    scale = max(float(np.abs(T.blocks).max()), np.finfo(float).tiny)
    err = float(np.abs(back.blocks - T.blocks).max()) / scale
    tol = args.tolerance if args.tolerance is not None else 1e-15
    rep.add("round_trip_relative_error", err, tol)
    rep.check(err <= tol)
    rep.output = docs.to_dict(k)


def cmd_derepresent(rep, values, args):
    k = _expect(values[0], Kernel)
    rep.output = docs.to_dict(kernel_to_operator(k))


def cmd_apply(rep, values, args):
    if len(values) != 2:
        raise UsageError("apply needs a kernel, operator or multiplier and a function")
    op, f = values
    _expect(f, LpFunction, what="second input")
    if isinstance(op, Kernel):
        out = kernel_apply(op, f)
    elif isinstance(op, BlockOperator):
        out = apply(op, f)
    elif isinstance(op, Multiplier):
        out = multiplier_apply(op, f)
    else:
        raise UsageError("first input must be a kernel, operator or multiplier")
    rep.add("output_norm", out.norm())
    rep.output = docs.to_dict(out)


def cmd_norm(rep, values, args):
    v = values[0]
    if isinstance(v, Kernel):
        rep.add("sup_norm", sup_norm(v))
        return
    if isinstance(v, Multiplier):
        rep.add("sup_norm", multiplier_sup_norm(v))
        return
    T = _expect(v, BlockOperator)
    est = operator_norm(T, samples=args.samples, seed=args.seed)
    if est.exact:
        rep.add("operator_norm", est.value)
    else:
        rep.add("operator_norm", est.value, est.width / 2)
        rep.add("lower", est.lower)
        rep.add("upper", est.upper)
        rep.status = {"approx": [est.lower, est.upper]}
    rep.witnesses["norming_input"] = docs.to_dict(est.witness)


def cmd_check_isometry(rep, values, args):
    k = _expect(values[0], Kernel)
    tol = args.tolerance if args.tolerance is not None else 1e-12
    r = check_isometry(k, samples=args.samples, seed=args.seed, tolerance=tol)
    rep.add("sup_norm", r.sup_norm, tol)
    rep.add("operator_norm", r.operator_norm, tol)
    rep.add("difference", r.difference, tol)
    rep.add("witness_value", r.witness_value, tol)
    rep.add("probe_max", r.probe_max, r.probe_tolerance)
    rep.witnesses["norming_input"] = docs.to_dict(r.witness)
    rep.check(r.passed)


def cmd_extract_density(rep, values, args):
    T = _expect(values[0], BlockOperator)
    k = extract_density(T)
    tol = args.tolerance if args.tolerance is not None else 1e-12
    a, b = sup_norm(k), operator_norm(T).value
    rep.add("sup_norm", a, tol)
    rep.add("operator_norm", b, tol)
    rep.add("difference", abs(a - b), tol)
    rep.check(abs(a - b) <= tol)
    rep.output = docs.to_dict(k)


def cmd_pi_norm(rep, values, args):
    z = _expect(values[0], TensorElement)
    est = pi_norm(z, seed=args.seed)
    rep.add("exact", est.exact)
    if est.exact:
        rep.add("pi_norm", est.value)
    else:
        rep.add("pi_norm", est.value, est.width / 2)
        rep.add("lower", est.lower)
        rep.add("upper", est.upper)
        rep.status = {"approx": [est.lower, est.upper]}


def cmd_check_l1_product(rep, values, args):
    z = _expect(values[0], TensorElement)
    if len(z.factors) != 2 or not all(isinstance(f, FunctionFactor) for f in z.factors):
        raise UsageError("check-l1-product needs two L^1 function-space factors")
    tol = args.tolerance if args.tolerance is not None else 1e-12
    r = check_l1_product_identity(z.factors[0].space, z.factors[1].space, z, tol)
    rep.add("pi_norm", r.left, tol)
    rep.add("product_l1_norm", r.right, tol)
    rep.add("difference", r.difference, tol)
    rep.check(r.passed)


def cmd_check_commutativity(rep, values, args):
    z = _expect(values[0], TensorElement)
    r = check_commutativity(z, seed=args.seed, tolerance=args.tolerance)
    rep.add("exact", r.exact)
    rep.add("pi_norm", r.left, r.tolerance)
    rep.add("pi_norm_transposed", r.right, r.tolerance)
    rep.add("difference", r.difference, r.tolerance)
    rep.check(r.passed)
    if r.passed and not r.exact:
        lo = max(r.left_interval[0], r.right_interval[0])
        hi = min(r.left_interval[1], r.right_interval[1])
        rep.status = {"approx": [lo, max(lo, hi)]}


def cmd_check_positive(rep, values, args):
    v = values[0]
    if isinstance(v, LpFunction):
        rep.add("positive", is_positive_function(v))
        rep.check(is_positive_function(v))
        return
    if isinstance(v, Multiplier):
        v = multiplier_to_operator(v)
    if isinstance(v, Kernel):
        positive = is_positive_kernel(v)
        rep.add("kernel_positive", positive)
        T = kernel_to_operator(v)
    else:
        T = _expect(v, BlockOperator)
        positive = is_positive_operator(T)
    sampled = is_positive_operator(T, mode="sampled", seed=args.seed, samples=args.samples)
    rep.add("operator_positive", is_positive_operator(T))
    rep.add("operator_positive_sampled", sampled)
    rep.add("modes_agree", sampled == positive)
    w = positivity_witness(T)
    if w is not None:
        rep.witnesses["positive_input"] = docs.to_dict(w.function)
        rep.add("witness_image_value", w.image_value)
    rep.check(positive and sampled == positive)


def cmd_regular_norm(rep, values, args):
    v = values[0]
    T = kernel_to_operator(v) if isinstance(v, Kernel) else _expect(v, BlockOperator)
    r = regular_norm(T)
    rep.add("operator_norm", r.operator_norm)
    rep.add("regular_norm", r.regular_norm)
    rep.add("ratio", r.ratio)
    rep.add("dominated", r.operator_norm <= r.regular_norm + 1e-12)
    rep.check(r.operator_norm <= r.regular_norm + 1e-12)
    rep.output = docs.to_dict(T.with_blocks(r.modulus_blocks))


def cmd_check_regular_kernel(rep, values, args):
    k = _expect(values[0], Kernel)
    tol = args.tolerance if args.tolerance is not None else 1e-12
    r = check_regular_kernel_correspondence(k, tol)
    rep.add("operator_regular_norm", r.operator_regular_norm, tol)
    rep.add("kernel_regular_norm", r.kernel_regular_norm, tol)
    rep.add("difference", r.difference, tol)
    rep.add("kernel_positive", r.kernel_positive)
    rep.add("operator_positive", r.operator_positive)
    rep.add("modulus_commutes", r.modulus_commutes)
    rep.check(r.passed)


def cmd_counterexample(rep, values, args):
    if values:
        raise UsageError("counterexample takes no input documents")
    tol = args.tolerance if args.tolerance is not None else 1e-9
    reports = counterexample_sequence(args.max_n)
    prev = None
    for i, r in enumerate(reports):
        n = 2 ** (i + 1)
        rep.add(f"operator_norm[{n}]", r.operator_norm, tol)
        rep.add(f"regular_norm[{n}]", r.regular_norm, tol)
        rep.check(abs(r.operator_norm - n ** -0.25) <= tol
                  and abs(r.regular_norm - n ** 0.25) <= tol)
        if prev is not None:
            rep.check(r.operator_norm < prev.operator_norm
                      and r.regular_norm > prev.regular_norm)
        prev = r
    rep.add("count", len(reports), 0.0)


def _locality_witness(rep, T, witness):
    rep.witnesses["atoms"] = [docs.space_payload(T.domain_space)["atoms"][a]
                              for a in witness.atoms]
    rep.witnesses["input"] = docs.to_dict(witness.function)
    rep.witnesses["target_atom"] = docs.space_payload(T.domain_space)["atoms"][
        witness.target_atom]


def cmd_check_local(rep, values, args):
    T = _expect(values[0], BlockOperator)
    local, witness = is_local(T)
    rep.add("local", local)
    if not local:
        rep.add("witness_replayed", witness.replay(T))
        _locality_witness(rep, T, witness)
    rep.check(local)


def cmd_extract_multiplier(rep, values, args):
    T = _expect(values[0], BlockOperator)
    tol = args.tolerance if args.tolerance is not None else 1e-10
    try:
        r = check_multiplier_norm(T, tol)
    except NonLocalError as exc:
        rep.add("local", False)
        _locality_witness(rep, T, exc.witness)
        rep.check(False)
        return
    except NotExactError:
        M = extract_multiplier(T)
        rep.add("multiplier_norm", multiplier_sup_norm(M))
        rep.output = docs.to_dict(M)
        return
    M = extract_multiplier(T)
    rep.add("multiplier_norm", r.multiplier_norm, tol)
    rep.add("operator_norm", r.operator_norm, tol)
    rep.add("witness_value", r.witness_value, tol)
    rep.add("reconstructed", multiplier_to_operator(M, T.domain_exponent) == T)
    rep.check(r.passed and multiplier_to_operator(M, T.domain_exponent) == T)
    rep.output = docs.to_dict(M)


def cmd_check_multiplier_positive(rep, values, args):
    v = values[0]
    T = multiplier_to_operator(v) if isinstance(v, Multiplier) else _expect(v, BlockOperator)
    r = check_multiplier_positivity(T, seed=args.seed, samples=args.samples)
    rep.add("operator_positive", r.operator_positive)
    rep.add("multiplier_positive", r.multiplier_positive)
    rep.add("agree", r.passed)
    w = positivity_witness(T)
    if w is not None:
        rep.witnesses["positive_input"] = docs.to_dict(w.function)
    rep.check(r.passed)


def cmd_hs_norm(rep, values, args):
    v = values[0]
    if isinstance(v, Kernel):
        rep.add("hs_norm", hs_norm_kernel(v))
    else:
        rep.add("hs_norm", hs_norm_operator(_expect(v, BlockOperator)))


def cmd_check_hs(rep, values, args):
    k = _expect(values[0], Kernel)
    tol = args.tolerance if args.tolerance is not None else 1e-10
    r = check_hs_isometry(k, seed=args.seed, tolerance=tol)
    rep.add("hs_norm_operator", r.hs_norm_operator, tol)
    rep.add("hs_norm_kernel", r.hs_norm_kernel, tol)
    rep.add("difference", r.difference, tol)
    rep.add("spectral_norm", r.spectral_norm, tol)
    rep.check(r.passed)


COMMANDS: dict[str, tuple[Callable, int, str]] = {
    "represent": (cmd_represent, 1, "kernel of an operator"),
    "derepresent": (cmd_derepresent, 1, "operator T_k of a kernel"),
    "apply": (cmd_apply, 2, "apply a kernel, operator or multiplier to a function"),
    "norm": (cmd_norm, 1, "operator norm or kernel sup norm"),
    "check-isometry": (cmd_check_isometry, 1, "kernel sup norm against ||T_k||"),
    "extract-density": (cmd_extract_density, 1, "density of T: L^1 -> F'"),
    "pi-norm": (cmd_pi_norm, 1, "projective tensor norm"),
    "check-l1-product": (cmd_check_l1_product, 1, "L^1 (x) L^1 against L^1 of the product"),
    "check-commutativity": (cmd_check_commutativity, 1, "pi norm of z and its transpose"),
    "check-positive": (cmd_check_positive, 1, "positivity, with a witness if negative"),
    "regular-norm": (cmd_regular_norm, 1, "modulus and regular norm"),
    "check-regular-kernel": (cmd_check_regular_kernel, 1, "regular norm of T_k vs k"),
    "counterexample": (cmd_counterexample, 0, "Hadamard sequence ||S_n|| -> 0, ||S_n||_r -> inf"),
    "check-local": (cmd_check_local, 1, "locality, with a witness if not local"),
    "extract-multiplier": (cmd_extract_multiplier, 1, "multiplier of a local operator"),
    "check-multiplier-positive": (cmd_check_multiplier_positive, 1,
                                  "positivity of T against its multiplier"),
    "hs-norm": (cmd_hs_norm, 1, "Hilbert-Schmidt norm"),
    "check-hs": (cmd_check_hs, 1, "operator and kernel Hilbert-Schmidt sums"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kernelrep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    for name, (_, _, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("inputs", nargs="*", help="input documents ('-' for stdin)")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--samples", type=int, default=10000)
        p.add_argument("--tolerance", type=float, default=None)
        p.add_argument("--max-n", type=int, default=64)
    return parser


def _read(path: str, stdin) -> bytes:
    if path == "-":
        data = stdin.read()
        return data.encode("utf-8") if isinstance(data, str) else data
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _error_document(exc: KernelRepError, command) -> dict:
    out = {"kind": "error", "version": docs.VERSION, "code": exc.code, "message": str(exc),
           "command": command}
    if getattr(exc, "path", None):
        out["path"] = exc.path
    if getattr(exc, "line", None) is not None:
        out["line"] = exc.line
    return out


def run(argv, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin.buffer
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        func, arity, _ = COMMANDS[command]
        if len(args.inputs) != arity:
            raise UsageError(f"{command} takes {arity} input document(s), "
                             f"got {len(args.inputs)}")
        raw = [docs.loads(_read(p, stdin)) for p in args.inputs]
        values = [docs.from_dict(d) for d in raw]
        rep = Report(command, [{"kind": d["kind"], "digest": docs.digest(d)} for d in raw])
        func(rep, values, args)
    except KernelRepError as exc:
        stdout.write(docs.dumps(_error_document(exc, command)))
        stderr.write(f"kernelrep: error [{exc.code}]: {exc}\n")
        return EXIT_INPUT
    stdout.write(docs.dumps(rep.to_dict()))
    if rep.status == "fail":
        stderr.write(f"kernelrep: {command}: check failed\n")
    return rep.exit_code


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
