"""Block operators between vector-valued L^p spaces over finite measure spaces.

A :class:`BlockOperator` stores one ``dim(G) x dim(E)`` matrix per atom pair
and acts on raw function values::

    (T f)(w2) = sum_{w1} B(w2, w1) f(w1)

No measure weights enter this formula; the kernel correspondence carries them.

Operator norms are computed by the first closed form that applies:

``column``
    domain exponent 1.  The extreme points of the L^1 unit ball are the
    atoms ``1_w u / mu(w)``, so ``||T|| = max_w ||B(., w)||_{E -> L^q(G)} / mu(w)``.
``row``
    codomain exponent inf.  The norm is the largest norm of a row block
    ``L^p(E) -> G``; closed when ``G`` is l^inf or ``p`` matches ``E``.
``diagonal``
    same measure space, ``p == q``, off-diagonal blocks zero: the largest
    diagonal block norm.
``flat``
    ``p`` equals the norm of ``E`` and ``q`` that of ``G``: both spaces are
    weighted l^p spaces of the flattened coefficients.

When none applies the result is a certified interval (sampling lower bound,
norm-equivalence upper bound) reported with ``exact=False``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import norms
from .errors import DimensionMismatch, NotExactError, SpaceMismatch
from .spaces import LpFunction, MeasureSpace, SpaceSpec, lp_norms, same_space


@dataclass(frozen=True, eq=False)
class BlockOperator:
    domain_space: MeasureSpace
    domain_spec: SpaceSpec
    domain_exponent: str
    codomain_space: MeasureSpace
    codomain_spec: SpaceSpec
    codomain_exponent: str
    blocks: np.ndarray

    def __post_init__(self):
        norms.check_tag(self.domain_exponent)
        norms.check_tag(self.codomain_exponent)
        b = np.array(self.blocks, dtype=float, copy=True)
        shape = (len(self.codomain_space), len(self.domain_space),
                 self.codomain_spec.dim, self.domain_spec.dim)
        if b.shape != shape:
            raise DimensionMismatch(f"blocks must have shape {shape}, got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    @classmethod
    def from_matrix(cls, matrix, src: str = "p2", dst: str = "p2",
                    ordered: bool = False) -> "BlockOperator":
        """A plain matrix ``l^src -> l^dst`` on a single atom of unit mass."""
        a = np.atleast_2d(np.asarray(matrix, dtype=float))
        point = MeasureSpace(("*",), [1.0])
        return cls(point, SpaceSpec(a.shape[1], src, ordered), src,
                   point, SpaceSpec(a.shape[0], dst, ordered), dst,
                   a[None, None])

    def with_blocks(self, blocks) -> "BlockOperator":
        return BlockOperator(self.domain_space, self.domain_spec, self.domain_exponent,
                             self.codomain_space, self.codomain_spec,
                             self.codomain_exponent, blocks)

    def same_shape(self, other: "BlockOperator") -> bool:
        return (self.domain_space == other.domain_space
                and self.codomain_space == other.codomain_space
                and self.domain_spec == other.domain_spec
                and self.codomain_spec == other.codomain_spec
                and self.domain_exponent == other.domain_exponent
                and self.codomain_exponent == other.codomain_exponent)

    def __add__(self, other):
        if not isinstance(other, BlockOperator) or not self.same_shape(other):
            return NotImplemented
        return self.with_blocks(self.blocks + other.blocks)

    def __sub__(self, other):
        if not isinstance(other, BlockOperator) or not self.same_shape(other):
            return NotImplemented
        return self.with_blocks(self.blocks - other.blocks)

    def __neg__(self):
        return self.with_blocks(-self.blocks)

    def __mul__(self, scalar):
        return self.with_blocks(float(scalar) * self.blocks)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, BlockOperator) and self.same_shape(other)
                and np.array_equal(self.blocks, other.blocks))

    __hash__ = None


def zero_operator(domain_space, domain_spec, domain_exponent,
                  codomain_space, codomain_spec, codomain_exponent) -> BlockOperator:
    shape = (len(codomain_space), len(domain_space), codomain_spec.dim, domain_spec.dim)
    return BlockOperator(domain_space, domain_spec, domain_exponent,
                         codomain_space, codomain_spec, codomain_exponent, np.zeros(shape))


def apply_values(blocks, values):
    """Apply raw blocks to ``values[..., w1, j]``; batch axes are kept."""
    return np.einsum("kjab,...jb->...ka", blocks, values)


def apply(T: BlockOperator, f: LpFunction) -> LpFunction:
    if not same_space(f, T.domain_space, T.domain_spec, T.domain_exponent):
        raise SpaceMismatch("function does not live in the operator's domain")
    return LpFunction(T.codomain_space, T.codomain_spec,
                      apply_values(T.blocks, f.values), T.codomain_exponent)


def compose(S: BlockOperator, T: BlockOperator) -> BlockOperator:
    """``S o T``."""
    if (T.codomain_space != S.domain_space or T.codomain_spec != S.domain_spec
            or T.codomain_exponent != S.domain_exponent):
        raise SpaceMismatch("codomain of T is not the domain of S")
    blocks = np.einsum("kmab,mjbc->kjac", S.blocks, T.blocks)
    return BlockOperator(T.domain_space, T.domain_spec, T.domain_exponent,
                         S.codomain_space, S.codomain_spec, S.codomain_exponent, blocks)


@dataclass(frozen=True)
class NormEstimate:
    """Operator norm with the regime that produced it.

    ``exact`` estimates have ``lower == value == upper``; otherwise ``value``
    is the midpoint of the certified interval ``[lower, upper]``.
    """

    value: float
    exact: bool
    lower: float
    upper: float
    witness: Optional[LpFunction] = None
    regime: str = "bounds"

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _wp(weights, tag, sign=1.0):
    return norms.weight_power(weights, tag, sign)


def _column_block(C, mu2, E, G, q):
    """Norm and witness of ``u -> (C[w2] u)_{w2}`` from E into L^q(mu2; G)."""
    n2, dG, dE = C.shape
    if q == "pinf":
        best, witness = -1.0, None
        for k in range(n2):
            mn = norms.matrix_norm(C[k], E, G)
            if not mn.exact:
                return None
            if mn.value > best:
                best, witness = mn.value, mn.witness
        return best, witness
    if q == G:
        stacked = (_wp(mu2, q)[:, None, None] * C).reshape(n2 * dG, dE)
        mn = norms.matrix_norm(stacked, E, q)
        return (mn.value, mn.witness) if mn.exact else None
    if E == "p1":
        pointwise = norms.vector_norm(C, G, axis=1)          # (n2, dE)
        cols = norms.weighted_norm(pointwise, mu2[:, None], q, axis=0)
        j = int(np.argmax(cols))
        return float(cols[j]), np.eye(dE)[j]
    return None


def _column_regime(B, mu1, mu2, E, G, q):
    n1 = B.shape[1]
    best, arg, u_best = -1.0, 0, None
    for j in range(n1):
        inner = _column_block(B[:, j], mu2, E, G, q)
        if inner is None:
            return None
        value = inner[0] / mu1[j]
        if value > best:
            best, arg, u_best = value, j, inner[1]
    values = np.zeros((n1, B.shape[3]))
    values[arg] = u_best / mu1[arg]
    return best, values


def _maximize_functional(a, mu, inner, outer):
    """Maximise the raw functional ``f -> sum_w a[w] . f[w]`` over the unit
    ball of ``L^outer(mu; inner)``; returns ``(value, f)``."""
    scale = _wp(mu, outer, -1.0)
    scaled = norms.vector_norm(a, norms.dual_tag(inner), axis=1) * scale
    c = norms.dual_attainer(scaled, outer)
    att = np.array([norms.dual_attainer(row, inner) for row in a])
    return float(norms.vector_norm(scaled, norms.dual_tag(outer))), (c * scale)[:, None] * att


def _norming_functional(y, mu, inner, outer):
    """Raw functional ``h`` of dual norm one with ``sum_w h[w] . y[w] = ||y||``."""
    x = y * _wp(mu, outer)[:, None]
    t = np.array([norms.dual_attainer(row, norms.dual_tag(inner)) for row in x])
    c = norms.dual_attainer(norms.vector_norm(x, inner, axis=1), norms.dual_tag(outer))
    return (_wp(mu, outer) * c)[:, None] * t


def _row_block(R, mu1, E, G, p):
    """Norm and witness values of ``f -> sum_w R[w] f(w)`` from L^p(mu1; E) into G."""
    n1, dG, dE = R.shape
    scale = _wp(mu1, p, -1.0)
    if G == "pinf":
        best, witness = -1.0, None
        for i in range(dG):
            value, f = _maximize_functional(R[:, i, :], mu1, E, p)
            if value > best:
                best, witness = value, f
        return best, witness
    if p == E:
        flat = (R * scale[:, None, None]).transpose(1, 0, 2).reshape(dG, n1 * dE)
        mn = norms.matrix_norm(flat, p, G)
        if not mn.exact:
            return None
        return mn.value, mn.witness.reshape(n1, dE) * scale[:, None]
    return None


def _row_regime(B, mu1, mu2, E, G, p):
    best, witness = -1.0, None
    for k in range(B.shape[0]):
        res = _row_block(B[k], mu1, E, G, p)
        if res is None:
            return None
        if res[0] > best:
            best, witness = res
    return best, witness


def _is_block_diagonal(T: BlockOperator) -> bool:
    if T.domain_space != T.codomain_space:
        return False
    n = len(T.domain_space)
    off = ~np.eye(n, dtype=bool)
    return not np.any(T.blocks[off])


def _diagonal_regime(T: BlockOperator):
    mu = T.domain_space.weights
    best, arg, u_best = -1.0, 0, None
    for w in range(len(mu)):
        mn = norms.matrix_norm(T.blocks[w, w], T.domain_spec.norm, T.codomain_spec.norm)
        if not mn.exact:
            return None
        if mn.value > best:
            best, arg, u_best = mn.value, w, mn.witness
    values = np.zeros((len(mu), T.domain_spec.dim))
    values[arg] = u_best * _wp(mu[arg], T.domain_exponent, -1.0)
    return best, values


def flat_matrix(T: BlockOperator) -> np.ndarray:
    """Blocks as one ``(n2*dG, n1*dE)`` matrix on the raw coefficients."""
    n2, n1, dG, dE = T.blocks.shape
    return T.blocks.transpose(0, 2, 1, 3).reshape(n2 * dG, n1 * dE)


def _flat_regime(T: BlockOperator):
    p, q = T.domain_exponent, T.codomain_exponent
    n2, n1, dG, dE = T.blocks.shape
    rows = np.repeat(_wp(T.codomain_space.weights, q), dG)
    cols = np.repeat(_wp(T.domain_space.weights, p, -1.0), dE)
    W = rows[:, None] * flat_matrix(T) * cols[None, :]
    mn = norms.matrix_norm(W, p, q)
    if not mn.exact:
        return None
    return mn.value, (mn.witness * cols).reshape(n1, dE)


def _regimes(T: BlockOperator):
    B = T.blocks
    mu1, mu2 = T.domain_space.weights, T.codomain_space.weights
    E, G = T.domain_spec.norm, T.codomain_spec.norm
    p, q = T.domain_exponent, T.codomain_exponent
    if p == "p1":
        yield "column", lambda: _column_regime(B, mu1, mu2, E, G, q)
    if q == "pinf":
        yield "row", lambda: _row_regime(B, mu1, mu2, E, G, p)
    if p == q and _is_block_diagonal(T):
        yield "diagonal", lambda: _diagonal_regime(T)
    if p == E and q == G:
        yield "flat", lambda: _flat_regime(T)


def random_unit_values(space: MeasureSpace, spec: SpaceSpec, exponent: str,
                       count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` random functions of unit L^p norm, as a ``(count, n, d)`` array.

    Half are dense Gaussian, a quarter are supported on one random atom and
    the rest have random sparsity, so both the interior and the extreme
    points of the unit ball get probed.
    """
    n, d = len(space), spec.dim
    vals = rng.standard_normal((count, n, d))
    quarter = count // 4
    if quarter:
        atom = rng.integers(0, n, size=quarter)
        mask = np.zeros((quarter, n, 1))
        mask[np.arange(quarter), atom] = 1.0
        vals[count // 2: count // 2 + quarter] *= mask
        rest = slice(count // 2 + quarter, count)
        vals[rest] *= rng.random(vals[rest].shape) < 0.4
    norm = lp_norms(vals, space, spec, exponent)
    dead = norm == 0
    if np.any(dead):
        vals[dead, 0, 0] = 1.0
        norm = lp_norms(vals, space, spec, exponent)
    return vals / norm[:, None, None]


def _deterministic_candidates(T: BlockOperator) -> np.ndarray:
    n1, dE = len(T.domain_space), T.domain_spec.dim
    scale = _wp(T.domain_space.weights, T.domain_exponent, -1.0)
    basis = np.eye(dE)
    if T.domain_spec.norm == "pinf":
        basis = np.vstack([basis, np.ones((1, dE))])
    elif T.domain_spec.norm == "p2":
        basis = np.vstack([basis, np.ones((1, dE)) / np.sqrt(dE)])
    out = np.zeros((n1 * len(basis), n1, dE))
    for w in range(n1):
        out[w * len(basis):(w + 1) * len(basis), w] = basis * scale[w]
    return out


def _ascend(T: BlockOperator, f, steps: int):
    """Nonlinear power iteration: ``||T f||`` never decreases along the way."""
    mu1, mu2 = T.domain_space.weights, T.codomain_space.weights
    value = float(lp_norms(apply_values(T.blocks, f), T.codomain_space,
                           T.codomain_spec, T.codomain_exponent))
    for _ in range(steps):
        h = _norming_functional(apply_values(T.blocks, f), mu2,
                                T.codomain_spec.norm, T.codomain_exponent)
        a = np.einsum("kjab,ka->jb", T.blocks, h)
        _, f_new = _maximize_functional(a, mu1, T.domain_spec.norm, T.domain_exponent)
        new = float(lp_norms(apply_values(T.blocks, f_new), T.codomain_space,
                             T.codomain_spec, T.codomain_exponent))
        if new <= value * (1.0 + 1e-13):
            break
        f, value = f_new, new
    return value, f


def sampled_lower_bound(T: BlockOperator, samples: int = 2000, seed: int = 0,
                        ascent_starts: int = 8, ascent_steps: int = 100):
    """Best ``||T f||`` over deterministic atomic candidates and seeded random
    unit functions, each of the best few refined by power ascent.

    Returns ``(value, witness_values)``.
    """
    rng = np.random.default_rng(seed)
    cand = np.concatenate([
        _deterministic_candidates(T),
        random_unit_values(T.domain_space, T.domain_spec, T.domain_exponent, samples, rng),
    ])
    out = lp_norms(apply_values(T.blocks, cand), T.codomain_space, T.codomain_spec,
                   T.codomain_exponent)
    best_k = int(np.argmax(out))
    best, witness = float(out[best_k]), cand[best_k]
    for k in np.argsort(out)[::-1][:ascent_starts]:
        value, f = _ascend(T, cand[k], ascent_steps)
        if value > best:
            best, witness = value, f
    return best, witness


def certified_upper_bound(T: BlockOperator) -> float:
    """Minimum of three always-valid upper bounds.

    Routing through ``L^1(l^1)`` on the domain side, through ``L^inf(l^inf)``
    on the codomain side (both with exact norm-equivalence constants), and the
    triangle inequality over the individual blocks.
    """
    B = T.blocks
    mu1, mu2 = T.domain_space.weights, T.codomain_space.weights
    E, G = T.domain_spec.norm, T.codomain_spec.norm
    p, q = T.domain_exponent, T.codomain_exponent
    n2, n1, dG, dE = B.shape
    inv = lambda tag: 1.0 / norms.EXPONENT[tag]  # noqa: E731

    c1 = dE ** (1.0 - inv(E)) * T.domain_space.mass ** (1.0 - inv(p))
    u1 = c1 * _column_regime(B, mu1, mu2, "p1", G, q)[0]

    c2 = dG ** inv(G) * T.codomain_space.mass ** inv(q)
    u2 = c2 * _row_regime(B, mu1, mu2, E, "pinf", p)[0]

    u3 = 0.0
    for k in range(n2):
        for j in range(n1):
            block = norms.matrix_norm(B[k, j], E, G).upper
            u3 += _wp(mu2[k], q) * _wp(mu1[j], p, -1.0) * block
    return float(min(u1, u2, u3))


def norm_bounds(T: BlockOperator, samples: int = 2000, seed: int = 0) -> NormEstimate:
    """Interval ``[sampled lower bound, certified upper bound]`` regardless of regime."""
    lower, values = sampled_lower_bound(T, samples, seed)
    upper = max(certified_upper_bound(T), lower)
    witness = LpFunction(T.domain_space, T.domain_spec, values, T.domain_exponent)
    return NormEstimate(0.5 * (lower + upper), False, lower, upper, witness, "bounds")


def operator_norm(T: BlockOperator, samples: int = 2000, seed: int = 0) -> NormEstimate:
    for name, regime in _regimes(T):
        res = regime()
        if res is not None:
            value, values = res
            witness = LpFunction(T.domain_space, T.domain_spec, values, T.domain_exponent)
            return NormEstimate(float(value), True, float(value), float(value), witness, name)
    return norm_bounds(T, samples, seed)


def norm_witness(T: BlockOperator) -> LpFunction:
    """Unit-norm input attaining the exact operator norm."""
    est = operator_norm(T)
    if not est.exact:
        raise NotExactError(
            f"no closed-form norm for L^{T.domain_exponent}({T.domain_spec.norm}) -> "
            f"L^{T.codomain_exponent}({T.codomain_spec.norm})")
    return est.witness
