"""Local operators on ``L^p(Omega; F')`` and their multipliers.

An operator is local when it commutes with every indicator multiplication
``f -> 1_A f``.  On a finite atomic space this means every off-diagonal
block vanishes, and the operator is then ``(M f)(w) = M(w) f(w)`` for the
per-atom matrices read off its diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import norms
from .errors import DimensionMismatch, NonLocalError, NotExactError, SpaceMismatch
from .operators import BlockOperator, apply, operator_norm
from .order import is_positive_operator, positivity_witness
from .spaces import LpFunction, MeasureSpace, SpaceSpec, atom_function


@dataclass(frozen=True, eq=False)
class Multiplier:
    """One ``dim x dim`` matrix per atom."""

    space: MeasureSpace
    spec: SpaceSpec
    blocks: np.ndarray

    def __post_init__(self):
        b = np.array(self.blocks, dtype=float, copy=True)
        shape = (len(self.space), self.spec.dim, self.spec.dim)
        if b.shape != shape:
            raise DimensionMismatch(f"multiplier blocks must have shape {shape}, got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    def __eq__(self, other):
        return (isinstance(other, Multiplier) and self.space == other.space
                and self.spec == other.spec and np.array_equal(self.blocks, other.blocks))

    __hash__ = None


def multiplier_norms(M: Multiplier) -> np.ndarray:
    out = np.empty(len(M.space))
    for w in range(len(out)):
        mn = norms.matrix_norm(M.blocks[w], M.spec.norm, M.spec.norm)
        if not mn.exact:
            raise NotExactError("multiplier block norm has no closed form at this size")
        out[w] = mn.value
    return out


def sup_norm(M: Multiplier) -> float:
    return float(multiplier_norms(M).max())


def multiplier_to_operator(M: Multiplier, exponent: str = "pinf") -> BlockOperator:
    n, d = len(M.space), M.spec.dim
    blocks = np.zeros((n, n, d, d))
    idx = np.arange(n)
    blocks[idx, idx] = M.blocks
    return BlockOperator(M.space, M.spec, exponent, M.space, M.spec, exponent, blocks)


def multiplier_apply(M: Multiplier, f: LpFunction) -> LpFunction:
    if f.space != M.space or f.spec.dim != M.spec.dim:
        raise SpaceMismatch("function does not live on the multiplier's space")
    return f.with_values(np.einsum("wab,wb->wa", M.blocks, f.values))


@dataclass(frozen=True)
class LocalityWitness:
    """``A = {atom}`` and ``f`` with ``T(1_A f) != 1_A T f``."""

    atoms: tuple
    function: LpFunction
    target_atom: int

    def replay(self, T: BlockOperator) -> bool:
        mask = np.zeros(len(T.domain_space))
        mask[list(self.atoms)] = 1.0
        f = self.function
        left = apply(T, f.with_values(mask[:, None] * f.values)).values
        right = mask[:, None] * apply(T, f).values
        return bool(np.any(left != right))


def _require_endomorphism(T: BlockOperator):
    if T.domain_space != T.codomain_space or T.domain_spec != T.codomain_spec:
        raise SpaceMismatch("locality needs a common measure space and value space")


def is_local(T: BlockOperator) -> tuple[bool, Optional[LocalityWitness]]:
    _require_endomorphism(T)
    n = len(T.domain_space)
    off = T.blocks.copy()
    off[np.arange(n), np.arange(n)] = 0.0
    nz = np.argwhere(off != 0)
    if nz.size == 0:
        return True, None
    w2, w1, _, b = (int(x) for x in nz[0])
    f = atom_function(T.domain_space, T.domain_spec, w1,
                      np.eye(T.domain_spec.dim)[b], T.domain_exponent)
    return False, LocalityWitness((w1,), f, w2)


def extract_multiplier(T: BlockOperator) -> Multiplier:
    """Read ``M(w) v = T(1_w v)(w)`` off basis vectors ``v``, atom by atom."""
    local, witness = is_local(T)
    if not local:
        raise NonLocalError(f"operator moves mass from atom {witness.atoms[0]} to atom "
                            f"{witness.target_atom}", witness)
    n, d = len(T.domain_space), T.domain_spec.dim
    blocks = np.empty((n, d, d))
    basis = np.eye(d)
    for w in range(n):
        for j in range(d):
            f = atom_function(T.domain_space, T.domain_spec, w, basis[j], T.domain_exponent)
            blocks[w, :, j] = apply(T, f).values[w]
    return Multiplier(T.domain_space, T.domain_spec, blocks)


def multiplier_from_pairings(T: BlockOperator) -> Multiplier:
    """Same table built entry by entry from ``<e_i, T(1_w e_j)(w)>``.

    The weak-star and strong constructions of the multiplier space agree on a
    finite atomic space; this is the weak-star path.
    """
    local, witness = is_local(T)
    if not local:
        raise NonLocalError("operator is not local", witness)
    n, d = len(T.domain_space), T.domain_spec.dim
    blocks = np.empty((n, d, d))
    basis = np.eye(d)
    for w in range(n):
        for j in range(d):
            image = apply(T, atom_function(T.domain_space, T.domain_spec, w, basis[j],
                                           T.domain_exponent)).values[w]
            for i in range(d):
                blocks[w, i, j] = float(basis[i] @ image)
    return Multiplier(T.domain_space, T.domain_spec, blocks)


@dataclass(frozen=True)
class MultiplierNormReport:
    """``witness_value`` is ``||T f||`` for the unit input built from the
    largest multiplier block, so it certifies ``||T|| >= ||M||_inf`` by
    direct application."""

    multiplier_norm: float
    operator_norm: float
    witness_value: float
    regime: str
    tolerance: float

    @property
    def passed(self) -> bool:
        return (self.multiplier_norm <= self.operator_norm + self.tolerance
                and abs(self.multiplier_norm - self.operator_norm) <= self.tolerance
                and abs(self.witness_value - self.multiplier_norm) <= self.tolerance)


def check_multiplier_norm(T: BlockOperator, tolerance: float = 1e-10) -> MultiplierNormReport:
    M = extract_multiplier(T)
    est = operator_norm(T)
    if not est.exact:
        raise NotExactError("operator norm has no closed form here")
    block = multiplier_norms(M)
    w = int(np.argmax(block))
    mn = norms.matrix_norm(M.blocks[w], M.spec.norm, M.spec.norm)
    f = atom_function(T.domain_space, T.domain_spec, w, mn.witness, T.domain_exponent,
                      normalize=True)
    witness_value = apply(T, f).norm() / f.norm()
    return MultiplierNormReport(float(block[w]), est.value, float(witness_value), est.regime,
                                tolerance)


@dataclass(frozen=True)
class MultiplierPositivityReport:
    operator_positive: bool
    multiplier_positive: bool
    operator_witness_atom: Optional[int]
    multiplier_witness_atom: Optional[int]

    @property
    def passed(self) -> bool:
        return (self.operator_positive == self.multiplier_positive
                and self.operator_witness_atom == self.multiplier_witness_atom)


def check_multiplier_positivity(T: BlockOperator, seed: int = 42,
                                samples: int = 1000) -> MultiplierPositivityReport:
    """Positivity of ``T`` (tested on positive inputs) against positivity of
    every extracted ``M(w)``."""
    M = extract_multiplier(T)
    op_pos = is_positive_operator(T, mode="sampled", seed=seed, samples=samples)
    mult_pos = bool(np.all(M.blocks >= 0))
    wit = positivity_witness(T)
    op_atom = None if wit is None else wit.domain_atom
    mult_atom = None if mult_pos else int(np.argmin(M.blocks.reshape(len(M.space), -1).min(axis=1)))
    return MultiplierPositivityReport(op_pos, mult_pos, op_atom, mult_atom)


def random_local_operator(space: MeasureSpace, spec: SpaceSpec, exponent: str, rng
                          ) -> BlockOperator:
    """Seeded block-diagonal operator with Gaussian diagonal blocks."""
    M = Multiplier(space, spec, rng.standard_normal((len(space), spec.dim, spec.dim)))
    return multiplier_to_operator(M, exponent)


__all__ = [
    "Multiplier", "multiplier_norms", "sup_norm", "multiplier_to_operator",
    "multiplier_apply", "LocalityWitness", "is_local", "extract_multiplier",
    "multiplier_from_pairings", "MultiplierNormReport", "check_multiplier_norm",
    "MultiplierPositivityReport", "check_multiplier_positivity", "random_local_operator",
]
