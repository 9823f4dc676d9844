"""Finite measure spaces, normed-space descriptors and vector-valued L^p functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from . import norms
from .errors import DimensionMismatch, InvalidSpace, SpaceMismatch


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    """Finitely many atoms, each carrying a strictly positive finite mass.

    Parameters
    ----------
    atoms : sequence of hashable
        Unique atom identifiers, in order.
    weights : sequence of float
        ``mu(atom)`` for each atom.
    """

    atoms: tuple
    weights: np.ndarray

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise InvalidSpace("a measure space needs at least one atom")
        if len(set(atoms)) != len(atoms):
            raise InvalidSpace("atom identifiers must be unique")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(atoms),):
            raise InvalidSpace(f"expected {len(atoms)} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InvalidSpace("weights must be strictly positive and finite")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def from_weights(cls, weights: Sequence[float], prefix: str = "w") -> "MeasureSpace":
        return cls(tuple(f"{prefix}{i}" for i in range(len(weights))), weights)

    def __len__(self):
        return len(self.atoms)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def index(self, atom: Hashable) -> int:
        return self.atoms.index(atom)

    def __eq__(self, other):
        return (isinstance(other, MeasureSpace) and self.atoms == other.atoms
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash((self.atoms, self.weights.tobytes()))

    def __repr__(self):
        return f"MeasureSpace(atoms={self.atoms!r}, weights={self.weights.tolist()!r})"


@dataclass(frozen=True)
class SpaceSpec:
    """``(R^dim, ||.||_norm)``, optionally with the coordinatewise order.

    The dual of ``(R^n, p)`` is ``(R^n, p')``, so dual spaces are SpaceSpecs too.
    """

    dim: int
    norm: str = "p2"
    ordered: bool = False

    def __post_init__(self):
        if isinstance(self.dim, bool) or int(self.dim) != self.dim or self.dim < 1:
            raise InvalidSpace(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        norms.check_tag(self.norm)
        object.__setattr__(self, "ordered", bool(self.ordered))

    def dual(self) -> "SpaceSpec":
        return SpaceSpec(self.dim, norms.dual_tag(self.norm), self.ordered)


@dataclass(frozen=True, eq=False)
class LpFunction:
    """A function ``Omega -> E`` stored as one vector per atom, normed in L^p."""

    space: MeasureSpace
    spec: SpaceSpec
    values: np.ndarray
    exponent: str = "p1"

    def __post_init__(self):
        norms.check_tag(self.exponent)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1 and self.spec.dim == 1:
            v = v[:, None]
        if v.shape != (len(self.space), self.spec.dim):
            raise DimensionMismatch(
                f"values must have shape {(len(self.space), self.spec.dim)}, got {v.shape}")
        object.__setattr__(self, "values", _frozen(v))

    def with_values(self, values) -> "LpFunction":
        return LpFunction(self.space, self.spec, values, self.exponent)

    def norm(self) -> float:
        return lp_norm(self)

    def __eq__(self, other):
        return (isinstance(other, LpFunction) and self.space == other.space
                and self.spec == other.spec and self.exponent == other.exponent
                and np.array_equal(self.values, other.values))

    __hash__ = None


def product_space(s1: MeasureSpace, s2: MeasureSpace) -> MeasureSpace:
    """Product measure; atoms are pairs in row-major order."""
    atoms = tuple((a, b) for a in s1.atoms for b in s2.atoms)
    return MeasureSpace(atoms, np.outer(s1.weights, s2.weights).ravel())


def vector_norm(v, spec: SpaceSpec) -> float:
    v = np.asarray(v, dtype=float)
    if v.shape != (spec.dim,):
        raise DimensionMismatch(f"vector of shape {v.shape} does not live in R^{spec.dim}")
    return float(norms.vector_norm(v, spec.norm))


def lp_norms(values, space: MeasureSpace, spec: SpaceSpec, exponent: str):
    """Vectorised ``lp_norm`` over leading batch axes of ``values[..., atom, coord]``."""
    pointwise = norms.vector_norm(values, spec.norm, axis=-1)
    return norms.weighted_norm(pointwise, space.weights, exponent, axis=-1)


def lp_norm(f: LpFunction) -> float:
    return float(lp_norms(f.values, f.space, f.spec, f.exponent))


def atom_function(space: MeasureSpace, spec: SpaceSpec, atom: int, vector,
                  exponent: str = "p1", normalize: bool = False) -> LpFunction:
    """``1_atom * vector``; with ``normalize`` the result has unit L^p norm
    whenever ``vector`` has unit norm (scaled by ``mu(atom)^(-1/p)``)."""
    values = np.zeros((len(space), spec.dim))
    values[atom] = np.asarray(vector, dtype=float)
    if normalize:
        values[atom] *= norms.weight_power(space.weights[atom], exponent, -1.0)
    return LpFunction(space, spec, values, exponent)


def zero_function(space: MeasureSpace, spec: SpaceSpec, exponent: str = "p1") -> LpFunction:
    return LpFunction(space, spec, np.zeros((len(space), spec.dim)), exponent)


def pairing(f: LpFunction, g: LpFunction) -> float:
    """``sum_w mu(w) <f(w), g(w)>``."""
    if f.space != g.space or f.spec.dim != g.spec.dim:
        raise SpaceMismatch("functions live on different spaces")
    return float(f.space.weights @ (f.values * g.values).sum(axis=1))


def same_space(f: LpFunction, space: MeasureSpace, spec: SpaceSpec, exponent: str) -> bool:
    return f.space == space and f.spec == spec and f.exponent == exponent


def dual_exponent(tag: str) -> str:
    return norms.dual_tag(tag)


def exponent_value(tag: str) -> float:
    return norms.EXPONENT[norms.check_tag(tag)]


__all__ = [
    "MeasureSpace", "SpaceSpec", "LpFunction", "product_space", "vector_norm",
    "lp_norm", "lp_norms", "atom_function", "zero_function", "pairing",
    "dual_exponent", "exponent_value",
]
