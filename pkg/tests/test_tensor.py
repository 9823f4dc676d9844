import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kernelrep import norms
from kernelrep.errors import DimensionMismatch, FactorError, NotExactError
from kernelrep.spaces import MeasureSpace, SpaceSpec
from kernelrep.tensor import (FunctionFactor, TensorElement, check_associativity,
                              check_commutativity, check_l1_product_identity,
                              decomposition_search, dual_operator_norm, duality_pairing,
                              extremal_operator, factor_norm, function_to_tensor, pi_bounds,
                              pi_norm, simple_tensor, tensor_to_function, transpose)

TAGS = norms.NORM_TAGS


def spec(d, tag):
    return SpaceSpec(d, tag)


def test_l1_identity_example():
    est = pi_norm(TensorElement((spec(2, "p1"), spec(2, "p1")), np.eye(2)))
    assert est.exact and est.value == 2.0
    search = pi_bounds(TensorElement((spec(2, "p1"), spec(2, "p1")), np.eye(2)))
    assert abs(search.upper - 2.0) <= 1e-9 and search.lower <= 2.0 + 1e-12


def test_hilbert_identity_example():
    z = TensorElement((spec(2, "p2"), spec(2, "p2")), np.eye(2))
    est = pi_norm(z)
    assert est.exact and abs(est.value - 2.0) <= 1e-15
    # the identity operator certifies the lower bound
    assert duality_pairing(np.eye(2), z) == 2.0
    assert dual_operator_norm(np.eye(2), z.factors).value == 1.0


def test_weighted_l1_example():
    s1, s2 = MeasureSpace.from_weights([1, 2]), MeasureSpace.from_weights([3])
    z = TensorElement((FunctionFactor(s1), FunctionFactor(s2)), [[1.0], [-1.0]])
    assert pi_norm(z).value == 9.0
    r = check_l1_product_identity(s1, s2, z)
    assert r.passed and r.left == r.right == 9.0


def test_l1_product_trivial_cases():
    s = MeasureSpace(("a",), [1.0])
    z = TensorElement((FunctionFactor(s), FunctionFactor(s)), [[-2.5]])
    r = check_l1_product_identity(s, s, z)
    assert r.left == r.right == 2.5
    z0 = TensorElement((FunctionFactor(s), FunctionFactor(s)), [[0.0]])
    assert check_l1_product_identity(s, s, z0).left == 0.0


def test_factor_count_and_shape():
    with pytest.raises(FactorError):
        pi_norm(TensorElement((spec(2, "p1"),), [1.0, 2.0]))
    with pytest.raises(DimensionMismatch):
        TensorElement((spec(2, "p1"), spec(3, "p1")), np.zeros((3, 2)))


@settings(max_examples=150, deadline=None)
@given(data=st.data(), t0=st.sampled_from(TAGS), t1=st.sampled_from(TAGS))
def test_cross_norm(data, t0, t1):
    u = data.draw(arrays(float, 3, elements=st.floats(-5, 5, allow_nan=False)))
    v = data.draw(arrays(float, 2, elements=st.floats(-5, 5, allow_nan=False)))
    z = simple_tensor(u, v, spec(3, t0), spec(2, t1))
    expected = norms.vector_norm(u, t0) * norms.vector_norm(v, t1)
    est = pi_norm(z, restarts=5)
    if est.exact:
        assert abs(est.value - expected) <= 1e-12 * max(1.0, expected)
    else:
        assert est.lower <= expected * (1 + 1e-9) + 1e-12
        assert expected <= est.upper * (1 + 1e-9) + 1e-12


def test_nuclear_matches_numpy():
    rng = np.random.default_rng(0)
    for _ in range(20):
        X = rng.standard_normal((3, 4))
        z = TensorElement((spec(3, "p2"), spec(4, "p2")), X)
        assert abs(pi_norm(z).value - np.linalg.norm(X, "nuc")) <= 1e-12 * np.abs(X).sum()


@pytest.mark.parametrize("t0,t1", [("p1", "p2"), ("p1", "pinf"), ("p2", "p1"), ("pinf", "p1"),
                                   ("p2", "p2")])
def test_search_converges_to_exact_value(t0, t1):
    rng = np.random.default_rng(1)
    for _ in range(5):
        z = TensorElement((spec(3, t0), spec(3, t1)), rng.standard_normal((3, 3)))
        exact = pi_norm(z).value
        res = pi_bounds(z)
        assert res.lower <= exact * (1 + 1e-9)
        assert exact <= res.upper * (1 + 1e-9)
        assert res.upper <= 1.01 * exact


def test_search_reconstructs_element():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((3, 3))
    res = decomposition_search(X, "pinf", "p2")
    rebuilt = sum(c * np.outer(u, v) for c, (u, v) in zip(res.coefficients, res.atoms))
    np.testing.assert_allclose(rebuilt, X, atol=1e-8)
    # every atom is a unit pair, so the cost bounds the norm
    for u, v in res.atoms:
        assert norms.vector_norm(u, "pinf") <= 1 + 1e-12
        assert norms.vector_norm(v, "p2") <= 1 + 1e-12
    assert res.rank <= 9  # a basic LP solution has at most dim E * dim F atoms


@pytest.mark.parametrize("t0,t1", [("pinf", "pinf"), ("p2", "pinf"), ("pinf", "p2")])
def test_bounds_are_ordered_and_tight(t0, t1):
    rng = np.random.default_rng(4)
    z = TensorElement((spec(3, t0), spec(3, t1)), rng.standard_normal((3, 3)))
    est = pi_norm(z)
    assert not est.exact
    assert est.lower <= est.upper
    assert est.width <= 1e-3 * est.upper


def test_triangle_and_homogeneity_in_search_mode():
    rng = np.random.default_rng(5)
    f = (spec(3, "pinf"), spec(2, "p2"))
    for _ in range(3):
        a, b = rng.standard_normal((2, 3, 2))
        za, zb = TensorElement(f, a), TensorElement(f, b)
        ea, eb, es = pi_norm(za), pi_norm(zb), pi_norm(TensorElement(f, a + b))
        assert es.lower <= ea.upper + eb.upper + 1e-9
        e3 = pi_norm(TensorElement(f, -3 * a))
        assert e3.lower <= 3 * ea.upper * (1 + 1e-9) and 3 * ea.lower <= e3.upper * (1 + 1e-9)


def test_duality_pairing_simple_tensor():
    rng = np.random.default_rng(6)
    x, y, T = rng.standard_normal(3), rng.standard_normal(2), rng.standard_normal((2, 3))
    z = simple_tensor(x, y, spec(3, "p1"), spec(2, "p2"))
    assert abs(duality_pairing(T, z) - (T @ x) @ y) <= 1e-12
    assert duality_pairing(np.zeros((2, 3)), z) == 0.0
    with pytest.raises(DimensionMismatch):
        duality_pairing(np.zeros((3, 2)), z)


def test_duality_bound_l1_l1():
    rng = np.random.default_rng(7)
    f = (spec(3, "p1"), spec(4, "p1"))
    for _ in range(1000):
        z = TensorElement(f, rng.standard_normal((3, 4)))
        T = rng.standard_normal((4, 3))
        assert abs(duality_pairing(T, z)) <= np.abs(T).max() * pi_norm(z).value * (1 + 1e-12)


@pytest.mark.parametrize("f0,f1", [
    (spec(3, "p1"), spec(2, "p2")),
    (spec(2, "pinf"), spec(3, "p1")),
    (spec(3, "p2"), spec(3, "p2")),
    (FunctionFactor(MeasureSpace.from_weights([0.5, 2.0, 1.5]), "p1"), spec(2, "pinf")),
    (FunctionFactor(MeasureSpace.from_weights([0.5, 2.0]), "p2"),
     FunctionFactor(MeasureSpace.from_weights([3.0, 0.25]), "p2")),
    (spec(2, "p2"), FunctionFactor(MeasureSpace.from_weights([0.5, 2.0]), "p1")),
])
def test_extremal_operator_attains_norm(f0, f1):
    rng = np.random.default_rng(8)
    for _ in range(50):
        z = TensorElement((f0, f1), rng.standard_normal((f0.dim, f1.dim)))
        T = extremal_operator(z)
        value = pi_norm(z).value
        assert dual_operator_norm(T, z.factors).value <= 1 + 1e-10
        assert abs(duality_pairing(T, z) - value) <= 1e-10 * max(1.0, value)


def test_extremal_operator_needs_closed_form():
    z = TensorElement((spec(2, "pinf"), spec(2, "pinf")), np.eye(2))
    with pytest.raises(NotExactError):
        extremal_operator(z)


def test_commutativity():
    rng = np.random.default_rng(9)
    s = MeasureSpace.from_weights([1.0, 0.5, 2.0])
    for f0, f1 in [(FunctionFactor(s), spec(2, "p2")), (spec(3, "p2"), spec(3, "p2")),
                   (spec(2, "pinf"), spec(3, "p1"))]:
        z = TensorElement((f0, f1), rng.standard_normal((f0.dim, f1.dim)))
        r = check_commutativity(z, seed=1)
        assert r.exact and r.passed
    z = TensorElement((spec(2, "pinf"), spec(3, "p2")), rng.standard_normal((2, 3)))
    r = check_commutativity(z, seed=1)
    assert not r.exact and r.passed
    u, v = np.array([1.0, -2.0]), np.array([3.0, 0.0, 4.0])
    r = check_commutativity(simple_tensor(u, v, spec(2, "p1"), spec(3, "p2")))
    assert r.left == r.right == 15.0


def test_associativity():
    rng = np.random.default_rng(10)
    s1, s2 = MeasureSpace.from_weights([1.0, 2.0]), MeasureSpace.from_weights([0.5, 3.0, 1.0])
    for middle in (spec(2, "p2"), spec(3, "pinf")):
        for order in ((FunctionFactor(s1), middle, FunctionFactor(s2)),
                      (FunctionFactor(s1), FunctionFactor(s2), middle),
                      (middle, spec(2, "p1"), FunctionFactor(s2))):
            shape = tuple(f.dim for f in order)
            r = check_associativity(TensorElement(order, rng.standard_normal(shape)))
            assert r.passed, r
    with pytest.raises(FactorError):
        check_associativity(TensorElement((spec(2, "p2"),) * 3, np.zeros((2, 2, 2))))


def test_tensor_function_round_trip():
    rng = np.random.default_rng(11)
    s = MeasureSpace.from_weights([1.0, 2.0])
    z = TensorElement((FunctionFactor(s), spec(2, "p2")), [[3.0, 4.0], [0.0, 1.0]])
    f = tensor_to_function(z)
    assert f.norm() == 7.0 == pi_norm(z).value
    assert function_to_tensor(f) == z
    zt = transpose(TensorElement((spec(3, "pinf"), spec(2, "p1")), rng.standard_normal((3, 2))))
    assert tensor_to_function(zt).norm() == pi_norm(zt).value


def test_factor_norm_of_function_space():
    s = MeasureSpace.from_weights([1.0, 4.0])
    assert factor_norm(FunctionFactor(s, "p2"), [1.0, 2.0]) == np.sqrt(17.0)
