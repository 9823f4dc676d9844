import math

import numpy as np
import pytest

from helpers import random_kernel
from kernelrep.errors import ExponentError
from kernelrep.hilbert_schmidt import check_hs_isometry, hs_norm_kernel, hs_norm_operator
from kernelrep.kernels import Kernel, kernel_to_operator, operator_to_kernel, sup_norm
from kernelrep.operators import BlockOperator
from kernelrep.spaces import MeasureSpace, SpaceSpec

R2 = SpaceSpec(2, "p2")
ONE = MeasureSpace(("x",), [1.0])


def test_zero():
    k = Kernel(ONE, ONE, R2, R2, np.zeros((1, 1, 2, 2)))
    assert hs_norm_kernel(k) == 0.0
    assert hs_norm_operator(kernel_to_operator(k, "p2", "p2")) == 0.0


def test_identity_block():
    k = Kernel(ONE, ONE, R2, R2, np.eye(2)[None, None])
    assert hs_norm_kernel(k) == math.sqrt(2)
    assert hs_norm_operator(BlockOperator.from_matrix(np.eye(2))) == math.sqrt(2)


def test_hand_sum():
    s1, s2 = MeasureSpace.from_weights([1.0, 2.0]), MeasureSpace.from_weights([3.0])
    k = Kernel(s1, s2, SpaceSpec(1), SpaceSpec(1), np.array([1.0, -1.0]).reshape(2, 1, 1, 1))
    assert hs_norm_kernel(k) == 3.0


def test_random_operator_matches_kernel_side():
    rng = np.random.default_rng(0)
    s1, s2 = MeasureSpace.from_weights([1.0, 2.0]), MeasureSpace.from_weights([3.0])
    for _ in range(20):
        T = BlockOperator(s1, R2, "p2", s2, R2, "p2", rng.standard_normal((1, 2, 2, 2)))
        assert abs(hs_norm_operator(T) - hs_norm_kernel(operator_to_kernel(T))) <= 1e-10


def test_rank_one_constant_kernel():
    rng = np.random.default_rng(1)
    s1, s2 = MeasureSpace.from_weights([0.5, 1.5, 2.0]), MeasureSpace.from_weights([3.0, 0.25])
    u, v = rng.standard_normal(2), rng.standard_normal(3)
    k = Kernel(s1, s2, SpaceSpec(3), R2, np.broadcast_to(np.outer(u, v), (3, 2, 2, 3)))
    expected = np.linalg.norm(u) * np.linalg.norm(v) * math.sqrt(s1.mass * s2.mass)
    r = check_hs_isometry(k)
    assert r.passed and abs(r.hs_norm_kernel - expected) <= 1e-12 * expected


def test_random_kernels():
    rng = np.random.default_rng(2)
    for _ in range(50):
        k = random_kernel(rng, "p2", "p2", max_atoms=4, max_dim=3)
        r = check_hs_isometry(k, seed=3)
        assert r.passed and r.difference <= 1e-10
        assert r.spectral_norm <= r.hs_norm_kernel * (1 + 1e-12)


def test_orthogonal_supports_add():
    rng = np.random.default_rng(3)
    for _ in range(50):
        k = random_kernel(rng, "p2", "p2", max_atoms=4, max_dim=3)
        mask = rng.random(k.blocks.shape[:2]) < 0.5
        a = k.with_blocks(k.blocks * mask[:, :, None, None])
        b = k.with_blocks(k.blocks * ~mask[:, :, None, None])
        total = hs_norm_kernel(k) ** 2
        assert abs(total - hs_norm_kernel(a) ** 2 - hs_norm_kernel(b) ** 2) <= 1e-12 * max(1, total)


def test_non_hilbert_rejected():
    k = Kernel(ONE, ONE, SpaceSpec(2, "p1"), R2, np.zeros((1, 1, 2, 2)))
    with pytest.raises(ExponentError):
        hs_norm_kernel(k)
    with pytest.raises(ExponentError):
        hs_norm_operator(kernel_to_operator(k))


def test_identity_multiplier_on_two_atoms():
    # HS norm sqrt(2) while the bounded kernel has sup norm 2
    s = MeasureSpace.from_weights([0.5, 0.5])
    R1 = SpaceSpec(1)
    T = BlockOperator(s, R1, "p2", s, R1, "p2", np.eye(2).reshape(2, 2, 1, 1))
    k = operator_to_kernel(T)
    assert sup_norm(k) == 2.0
    assert math.isclose(hs_norm_operator(T), math.sqrt(2), rel_tol=1e-15)
    assert math.isclose(hs_norm_kernel(k), math.sqrt(2), rel_tol=1e-15)
