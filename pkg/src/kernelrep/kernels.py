"""Kernel <-> operator correspondence on finite measure spaces.

A kernel assigns to each atom pair ``(w1, w2)`` a linear map ``E -> F'`` and
acts through the weighted sum::

    (T_k f)(w2) = sum_{w1} mu1(w1) k(w1, w2) f(w1)

Weight convention, fixed everywhere (including the document format): kernel
blocks are unweighted, operator blocks carry the factor ``mu1(w1)``.  Every
equivalence class on a finite atomic space has exactly one representative,
so no lifting is involved in either direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import norms
from .errors import DimensionMismatch, ExponentError, NotExactError, SpaceMismatch
from .operators import (BlockOperator, apply, apply_values, operator_norm,
                        random_unit_values)
from .spaces import LpFunction, MeasureSpace, SpaceSpec, atom_function, lp_norms

# Exponent pairs for which ``operator_to_kernel`` inverts the weighted sum:
# bounded kernels (L^1 -> L^inf) and Hilbert-Schmidt kernels (L^2 -> L^2).
KERNEL_EXPONENTS = (("p1", "pinf"), ("p2", "p2"))


@dataclass(frozen=True, eq=False)
class Kernel:
    space1: MeasureSpace
    space2: MeasureSpace
    domain_spec: SpaceSpec
    codomain_spec: SpaceSpec
    blocks: np.ndarray

    def __post_init__(self):
        b = np.array(self.blocks, dtype=float, copy=True)
        shape = (len(self.space1), len(self.space2),
                 self.codomain_spec.dim, self.domain_spec.dim)
        if b.shape != shape:
            raise DimensionMismatch(f"kernel blocks must have shape {shape}, got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    def with_blocks(self, blocks) -> "Kernel":
        return Kernel(self.space1, self.space2, self.domain_spec, self.codomain_spec, blocks)

    def __eq__(self, other):
        return (isinstance(other, Kernel) and self.space1 == other.space1
                and self.space2 == other.space2 and self.domain_spec == other.domain_spec
                and self.codomain_spec == other.codomain_spec
                and np.array_equal(self.blocks, other.blocks))

    __hash__ = None


def block_norms(k: Kernel) -> np.ndarray:
    """``||k(w1, w2)||_{E -> F'}`` for every atom pair."""
    out = np.empty(k.blocks.shape[:2])
    for i in range(out.shape[0]):
        for j in range(out.shape[1]):
            mn = norms.matrix_norm(k.blocks[i, j], k.domain_spec.norm, k.codomain_spec.norm)
            if not mn.exact:
                raise NotExactError("block norm has no closed form at this size")
            out[i, j] = mn.value
    return out


def sup_norm(k: Kernel) -> float:
    """The essential sup of the pointwise block norm (one atom, one representative)."""
    return float(block_norms(k).max())


def kernel_to_operator(k: Kernel, domain_exponent: str = "p1",
                       codomain_exponent: str = "pinf") -> BlockOperator:
    blocks = k.space1.weights[None, :, None, None] * k.blocks.transpose(1, 0, 2, 3)
    return BlockOperator(k.space1, k.domain_spec, domain_exponent,
                         k.space2, k.codomain_spec, codomain_exponent, blocks)


def operator_to_kernel(T: BlockOperator) -> Kernel:
    if (T.domain_exponent, T.codomain_exponent) not in KERNEL_EXPONENTS:
        raise ExponentError(
            f"kernel representation needs exponents (p1, pinf) or (p2, p2), got "
            f"({T.domain_exponent}, {T.codomain_exponent})")
    blocks = T.blocks.transpose(1, 0, 2, 3) / T.domain_space.weights[:, None, None, None]
    return Kernel(T.domain_space, T.codomain_space, T.domain_spec, T.codomain_spec, blocks)


def kernel_apply(k: Kernel, f: LpFunction) -> LpFunction:
    """Evaluate the weighted sum directly, without building the operator."""
    if f.space != k.space1 or f.spec.dim != k.domain_spec.dim:
        raise SpaceMismatch("function does not live on the kernel's first space")
    out = np.einsum("w,wvab,wb->va", k.space1.weights, k.blocks, f.values)
    return LpFunction(k.space2, k.codomain_spec, out, "pinf")


def extract_density(T: BlockOperator) -> Kernel:
    """Density of ``T: L^1(Omega) -> F'`` (codomain encoded as one atom).

    Replays the construction ``g_v = T(.)`` pointwise: the density at ``w`` is
    the image of the normalised indicator ``1_w / mu(w)``, i.e. the
    derivative of the vector measure ``A -> T 1_A``.
    """
    if T.domain_spec.dim != 1:
        raise DimensionMismatch("density extraction needs a scalar domain L^1(Omega)")
    if T.domain_exponent != "p1":
        raise ExponentError("density extraction needs domain exponent p1")
    if len(T.codomain_space) != 1 or T.codomain_exponent != "pinf":
        raise SpaceMismatch("density extraction needs a one-atom L^inf codomain")
    n = len(T.domain_space)
    density = np.empty((n, 1, T.codomain_spec.dim, 1))
    for w in range(n):
        probe = atom_function(T.domain_space, T.domain_spec, w, [1.0], "p1", normalize=True)
        density[w, 0, :, 0] = apply(T, probe).values[0]
    return Kernel(T.domain_space, T.codomain_space, T.domain_spec, T.codomain_spec, density)


@dataclass(frozen=True)
class IsometryReport:
    sup_norm: float
    operator_norm: float
    difference: float
    witness: LpFunction
    witness_value: float
    probe_max: float
    samples: int
    tolerance: float = 1e-12
    probe_tolerance: float = 1e-9

    @property
    def passed(self) -> bool:
        return (self.difference <= self.tolerance
                and abs(self.witness_value - self.operator_norm) <= self.tolerance
                and self.probe_max <= self.sup_norm + self.probe_tolerance)


def probe_max(T: BlockOperator, samples: int, seed: int, batch: int = 20000) -> float:
    """Largest ``||T f||`` over ``samples`` seeded random unit-norm inputs."""
    rng = np.random.default_rng(seed)
    best, done = 0.0, 0
    while done < samples:
        m = min(batch, samples - done)
        vals = random_unit_values(T.domain_space, T.domain_spec, T.domain_exponent, m, rng)
        out = lp_norms(apply_values(T.blocks, vals), T.codomain_space, T.codomain_spec,
                       T.codomain_exponent)
        best = max(best, float(out.max()))
        done += m
    return best


def check_isometry(k: Kernel, samples: int = 10000, seed: int = 42,
                   tolerance: float = 1e-12, probe_tolerance: float = 1e-9) -> IsometryReport:
    """Compare the kernel sup norm with the operator norm of ``T_k``.

    The kernel side is the largest block norm; the operator side is the
    column formula for L^1 domains, computed on the weighted operator blocks.
    """
    kernel_side = sup_norm(k)
    T = kernel_to_operator(k)
    est = operator_norm(T)
    if not est.exact:
        raise NotExactError("operator norm of T_k has no closed form here")
    witness_value = float(apply(T, est.witness).norm())
    return IsometryReport(
        sup_norm=kernel_side,
        operator_norm=est.value,
        difference=abs(kernel_side - est.value),
        witness=est.witness,
        witness_value=witness_value,
        probe_max=probe_max(T, samples, seed) if samples else 0.0,
        samples=samples,
        tolerance=tolerance,
        probe_tolerance=probe_tolerance,
    )


def zero_kernel(space1: MeasureSpace, space2: MeasureSpace, domain_spec: SpaceSpec,
                codomain_spec: SpaceSpec) -> Kernel:
    shape = (len(space1), len(space2), codomain_spec.dim, domain_spec.dim)
    return Kernel(space1, space2, domain_spec, codomain_spec, np.zeros(shape))


def kernel_modulus(k: Kernel) -> Kernel:
    return k.with_blocks(np.abs(k.blocks))


def as_scalar_kernel(values, space1: MeasureSpace, space2: MeasureSpace,
                     ordered: bool = False) -> Kernel:
    """Scalar kernel ``k(w1, w2)`` from an ``(n1, n2)`` array."""
    a = np.asarray(values, dtype=float)
    r = SpaceSpec(1, "p2", ordered)
    return Kernel(space1, space2, r, r, a[:, :, None, None])


__all__ = [
    "Kernel", "block_norms", "sup_norm", "kernel_to_operator", "operator_to_kernel",
    "kernel_apply", "extract_density", "IsometryReport", "check_isometry", "probe_max",
    "zero_kernel", "kernel_modulus", "as_scalar_kernel",
]
