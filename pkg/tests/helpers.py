"""Seeded random instances and brute-force oracles shared by the tests."""

import itertools

import numpy as np

from kernelrep.kernels import Kernel
from kernelrep.operators import BlockOperator
from kernelrep.spaces import MeasureSpace, SpaceSpec

TAGS = ("p1", "p2", "pinf")


def random_space(rng, n=None, max_atoms=5, prefix="w"):
    n = n or int(rng.integers(1, max_atoms + 1))
    return MeasureSpace.from_weights(rng.uniform(0.1, 3.0, n), prefix=prefix)


def sprinkle_zeros(a, rng, rate=0.3):
    """Set a random fraction of entries to exact zeros."""
    return np.where(rng.random(a.shape) < rate, 0.0, a)


def random_kernel(rng, E="p1", F="pinf", max_atoms=5, max_dim=4, ordered=False,
                  zeros=False, dims=None):
    s1 = random_space(rng, max_atoms=max_atoms, prefix="a")
    s2 = random_space(rng, max_atoms=max_atoms, prefix="b")
    de, df = dims or (int(rng.integers(1, max_dim + 1)), int(rng.integers(1, max_dim + 1)))
    blocks = rng.standard_normal((len(s1), len(s2), df, de))
    if zeros:
        blocks = sprinkle_zeros(blocks, rng)
    return Kernel(s1, s2, SpaceSpec(de, E, ordered), SpaceSpec(df, F, ordered), blocks)


def random_operator(rng, p="p1", q="pinf", E="p1", G="pinf", max_atoms=4, max_dim=3,
                    ordered=False, same_space=False, zeros=False):
    s1 = random_space(rng, max_atoms=max_atoms, prefix="a")
    s2 = s1 if same_space else random_space(rng, max_atoms=max_atoms, prefix="b")
    de = int(rng.integers(1, max_dim + 1))
    dg = de if same_space else int(rng.integers(1, max_dim + 1))
    blocks = rng.standard_normal((len(s2), len(s1), dg, de))
    if zeros:
        blocks = sprinkle_zeros(blocks, rng)
    return BlockOperator(s1, SpaceSpec(de, E, ordered), p, s2, SpaceSpec(dg, G, ordered), q,
                         blocks)


def _ball_vertices(d, tag):
    """Extreme points of the unit ball of l^tag_d for tag in {p1, pinf}."""
    if tag == "p1":
        eye = np.eye(d)
        return np.vstack([eye, -eye])
    return np.array(list(itertools.product((1.0, -1.0), repeat=d)))


def unit_ball_vertices(space, spec, exponent):
    """Extreme points of the unit ball of L^exponent(space; spec) when both
    tags are p1 or pinf; shape (k, n_atoms, dim)."""
    n, d = len(space), spec.dim
    mu = space.weights
    local = _ball_vertices(d, spec.norm)
    if exponent == "p1":
        out = []
        for w in range(n):
            for v in local:
                f = np.zeros((n, d))
                f[w] = v / mu[w]
                out.append(f)
        return np.array(out)
    # exponent pinf: one vertex of the local ball at every atom
    return np.array([np.array(c) for c in itertools.product(local, repeat=n)])


def brute_force_norm(T):
    """Exact operator norm by maximising the convex map f -> ||Tf|| over the
    finitely many extreme points of the domain ball."""
    from kernelrep.spaces import lp_norms
    verts = unit_ball_vertices(T.domain_space, T.domain_spec, T.domain_exponent)
    images = np.einsum("kjab,vjb->vka", T.blocks, verts)
    return float(lp_norms(images, T.codomain_space, T.codomain_spec,
                          T.codomain_exponent).max())
