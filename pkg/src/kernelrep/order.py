"""Positivity, modulus and the regular norm for coordinatewise-ordered spaces.

Every ``SpaceSpec`` with ``ordered=True`` carries the standard cone
``R^n_+``.  Between such spaces a matrix is positive iff its entries are
nonnegative, and its modulus ``|T| = sup{T, -T}`` is the entrywise absolute
value, so the regular norm is ``||T||_r = || |T| ||``.

Sign tests on input data are exact.  Sign tests on computed quantities treat
anything at or above ``-POSITIVITY_TOL`` as nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import norms
from .errors import FactorError, InvalidSpace, NotExactError, UnorderedSpaceError
from .kernels import Kernel, kernel_modulus, kernel_to_operator, operator_to_kernel
from .operators import BlockOperator, apply, apply_values, operator_norm
from .spaces import LpFunction, SpaceSpec, atom_function, lp_norm
from .tensor import TensorElement, is_l1, pi_norm, tensor_to_function

POSITIVITY_TOL = 1e-12


def _require_ordered(*specs):
    if not all(s.ordered for s in specs):
        raise UnorderedSpaceError("positivity needs ordered spaces")


def is_positive_function(f: LpFunction) -> bool:
    _require_ordered(f.spec)
    return bool(np.all(f.values >= 0))


def is_positive_kernel(k: Kernel) -> bool:
    _require_ordered(k.domain_spec, k.codomain_spec)
    return bool(np.all(k.blocks >= 0))


def _positive_probes(T: BlockOperator, samples: int, rng) -> np.ndarray:
    """Every scaled atom times basis vector, then random sparse positive functions."""
    n, d = len(T.domain_space), T.domain_spec.dim
    atoms = np.zeros((n * d, n, d))
    atoms[np.arange(n * d), np.repeat(np.arange(n), d), np.tile(np.arange(d), n)] = 1.0
    vals = np.abs(rng.standard_normal((samples, n, d)))
    vals *= rng.random((samples, n, d)) < 0.7
    return np.concatenate([atoms, vals])


def is_positive_operator(T: BlockOperator, mode: str = "exact", seed: int = 42,
                         samples: int = 1000) -> bool:
    """Positivity of ``T`` from its blocks (``exact``) or from its action on
    seeded positive inputs (``sampled``)."""
    _require_ordered(T.domain_spec, T.codomain_spec)
    if mode == "exact":
        return bool(np.all(T.blocks >= 0))
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    probes = _positive_probes(T, samples, np.random.default_rng(seed))
    return bool(np.all(apply_values(T.blocks, probes) >= -POSITIVITY_TOL))


@dataclass(frozen=True)
class PositivityWitness:
    """A positive input ``f = u 1_A`` whose image has a negative coordinate."""

    domain_atom: int
    basis: int
    codomain_atom: int
    coordinate: int
    function: LpFunction
    image_value: float


def positivity_witness(T: BlockOperator) -> Optional[PositivityWitness]:
    """Witness for the most negative block entry, or ``None`` if ``T >= 0``."""
    _require_ordered(T.domain_spec, T.codomain_spec)
    if np.all(T.blocks >= 0):
        return None
    w2, w1, a, b = np.unravel_index(int(np.argmin(T.blocks)), T.blocks.shape)
    u = np.eye(T.domain_spec.dim)[b]
    f = atom_function(T.domain_space, T.domain_spec, int(w1), u, T.domain_exponent)
    image = apply(T, f).values[w2, a]
    return PositivityWitness(int(w1), int(b), int(w2), int(a), f, float(image))


def replay_witness(T: BlockOperator, witness: PositivityWitness) -> bool:
    """True when the witness input is positive and its image is not."""
    image = apply(T, witness.function)
    return bool(is_positive_function(witness.function)
                and image.values[witness.codomain_atom, witness.coordinate] < 0)


def modulus(T: BlockOperator) -> BlockOperator:
    _require_ordered(T.domain_spec, T.codomain_spec)
    return T.with_blocks(np.abs(T.blocks))


@dataclass(frozen=True)
class RegularNormReport:
    operator_norm: float
    regular_norm: float
    modulus_blocks: np.ndarray
    ratio: float


def regular_norm(T: BlockOperator) -> RegularNormReport:
    mod = modulus(T)
    plain = operator_norm(T)
    reg = operator_norm(mod)
    if not (plain.exact and reg.exact):
        raise NotExactError("regular norm needs an exact operator-norm regime")
    ratio = 1.0 if plain.value == 0 else reg.value / plain.value
    return RegularNormReport(plain.value, reg.value, mod.blocks, ratio)


@dataclass(frozen=True)
class RegularKernelReport:
    operator_regular_norm: float
    kernel_regular_norm: float
    difference: float
    kernel_positive: bool
    operator_positive: bool
    modulus_commutes: bool
    tolerance: float

    @property
    def passed(self) -> bool:
        return (self.difference <= self.tolerance
                and self.kernel_positive == self.operator_positive
                and self.modulus_commutes)


def blockwise_regular_norms(k: Kernel) -> np.ndarray:
    out = np.empty(k.blocks.shape[:2])
    for i in range(out.shape[0]):
        for j in range(out.shape[1]):
            mn = norms.matrix_norm(np.abs(k.blocks[i, j]), k.domain_spec.norm,
                                   k.codomain_spec.norm)
            if not mn.exact:
                raise NotExactError("block regular norm has no closed form at this size")
            out[i, j] = mn.value
    return out


def check_regular_kernel_correspondence(k: Kernel, tolerance: float = 1e-12
                                        ) -> RegularKernelReport:
    """``||T_k||_r`` against the largest blockwise regular norm, positivity of
    ``k`` against positivity of ``T_k``, and ``|T_k| = T_|k|``."""
    T = kernel_to_operator(k)
    op_side = regular_norm(T).regular_norm
    kernel_side = float(blockwise_regular_norms(k).max())
    commutes = bool(np.array_equal(modulus(T).blocks,
                                   kernel_to_operator(kernel_modulus(k)).blocks))
    return RegularKernelReport(op_side, kernel_side, abs(op_side - kernel_side),
                               is_positive_kernel(k), is_positive_operator(T), commutes,
                               tolerance)


def modulus_kernel(T: BlockOperator) -> Kernel:
    """Kernel of ``|T|`` (equal to the blockwise modulus of the kernel of ``T``)."""
    return operator_to_kernel(modulus(T))


# -- Hadamard counterexample ---------------------------------------------------

def _power_of_two(n) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def sylvester_hadamard(n: int) -> np.ndarray:
    """Sylvester construction ``H_{2m} = [[H, H], [H, -H]]``."""
    if not _power_of_two(n):
        raise InvalidSpace(f"Hadamard order must be a power of two, got {n!r}")
    h = np.ones((1, 1))
    while h.shape[0] < n:
        h = np.kron(np.array([[1.0, 1.0], [1.0, -1.0]]), h)
    return h


MAX_COUNTEREXAMPLE_N = 1024


def counterexample_operator(n: int) -> BlockOperator:
    """``S_n = H_n / n^(3/4)`` on ordered ``l^2_n``."""
    return BlockOperator.from_matrix(sylvester_hadamard(n) / n ** 0.75, "p2", "p2",
                                     ordered=True)


def counterexample_sequence(max_n: int) -> list:
    """Regular-norm reports for ``S_n``, ``n = 2, 4, ..., max_n``.

    ``||S_n|| = n^(-1/4)`` tends to zero while ``||S_n||_r = n^(1/4)`` grows,
    so the operator norm does not control the regular norm.
    """
    if not _power_of_two(max_n) or max_n < 2 or max_n > MAX_COUNTEREXAMPLE_N:
        raise InvalidSpace(
            f"max_n must be a power of two in [2, {MAX_COUNTEREXAMPLE_N}], got {max_n!r}")
    out, n = [], 2
    while n <= max_n:
        out.append(regular_norm(counterexample_operator(n)))
        n *= 2
    return out


# -- L^1 factor tensors and the operator pairing --------------------------------

@dataclass(frozen=True)
class PTensorReport:
    value: float
    pi_norm: float
    difference: float
    tensor_positive: Optional[bool]
    function_positive: Optional[bool]

    @property
    def lattice_consistent(self) -> bool:
        return self.tensor_positive == self.function_positive


def p_tensor_norm_l1_factor(z: TensorElement) -> PTensorReport:
    """Norm of ``z`` through ``L^1(Omega) (x) F = L^1(Omega; F)``.

    The value is the L^1 norm of the associated function.  When ``F`` is
    ordered, positivity of the coefficient array is compared with positivity
    of that function.
    """
    if not any(is_l1(f) for f in z.factors):
        raise FactorError("element has no L^1 / l^1 factor")
    f = tensor_to_function(z)
    value = lp_norm(f)
    pi = pi_norm(z).value
    if f.spec.ordered:
        tensor_pos, func_pos = bool(np.all(z.coefficients >= 0)), is_positive_function(f)
    else:
        tensor_pos = func_pos = None
    return PTensorReport(value, pi, abs(value - pi), tensor_pos, func_pos)


@dataclass(frozen=True)
class RegularDualityReport:
    regular_norm: float
    pairing_sup: float
    difference: float
    operator_positive: bool
    pairing_positive: bool
    tolerance: float

    @property
    def passed(self) -> bool:
        return (self.difference <= self.tolerance
                and self.operator_positive == self.pairing_positive)


def regular_duality_check(S, domain: SpaceSpec, target: SpaceSpec, seed: int = 42,
                          samples: int = 1000, tolerance: float = 1e-10
                          ) -> RegularDualityReport:
    """Regular norm of ``S: E -> F'`` against the sup of ``psi_S(z) = <S, z>``
    over the unit ball of ``E (x) F`` with ``E = l^1``.

    ``S`` has shape ``(dim F, dim E)``; ``target`` describes ``F``.  The unit
    ball's extreme points are ``e_i (x) v`` with ``||v|| <= 1``, and for each
    ``i`` the sup over ``v`` is attained by an explicit norming vector.
    Positivity of ``psi_S`` is tested on seeded positive simple tensors.
    """
    S = np.asarray(S, dtype=float)
    if domain.norm != "p1" or not domain.ordered:
        raise FactorError("the pairing check needs an ordered l^1 domain")
    _require_ordered(target)
    if S.shape != (target.dim, domain.dim):
        raise InvalidSpace(f"S must have shape {(target.dim, domain.dim)}, got {S.shape}")
    dual = norms.dual_tag(target.norm)
    reg = float(norms.vector_norm(np.abs(S), dual, axis=0).max())
    sup = max(float(S[:, i] @ norms.dual_attainer(S[:, i], target.norm))
              for i in range(domain.dim))

    rng = np.random.default_rng(seed)
    u = np.vstack([np.eye(domain.dim), np.abs(rng.standard_normal((samples, domain.dim)))])
    v = np.vstack([np.eye(target.dim), np.abs(rng.standard_normal((samples, target.dim)))])
    idx_u = np.repeat(np.arange(domain.dim), target.dim)
    idx_v = np.tile(np.arange(target.dim), domain.dim)
    values = np.concatenate([
        np.einsum("ki,ji,kj->k", u[idx_u], S, v[idx_v]),
        np.einsum("ki,ji,kj->k", u[domain.dim:], S, v[target.dim:]),
    ])
    return RegularDualityReport(reg, sup, abs(reg - sup), bool(np.all(S >= 0)),
                                bool(np.all(values >= -POSITIVITY_TOL)), tolerance)


__all__ = [
    "POSITIVITY_TOL", "is_positive_function", "is_positive_kernel", "is_positive_operator",
    "PositivityWitness", "positivity_witness", "replay_witness", "modulus",
    "RegularNormReport", "regular_norm", "RegularKernelReport", "blockwise_regular_norms",
    "check_regular_kernel_correspondence", "modulus_kernel", "sylvester_hadamard",
    "counterexample_operator", "counterexample_sequence", "PTensorReport",
    "p_tensor_norm_l1_factor", "RegularDualityReport", "regular_duality_check",
]
