import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kernelrep import norms

TAGS = norms.NORM_TAGS
small = arrays(float, st.tuples(st.integers(1, 4), st.integers(1, 4)),
               elements=st.floats(-10, 10, allow_nan=False))


def brute_matrix_norm(A, src, dst):
    """Independent oracle: vertices for polyhedral balls, LAPACK for l^2 -> l^2,
    dense sphere sampling plus the dual formula otherwise."""
    m, n = A.shape
    if src == "p1":
        verts = np.vstack([np.eye(n), -np.eye(n)])
    elif src == "pinf":
        verts = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    elif dst == "p2":
        return np.linalg.norm(A, 2)
    else:
        # ||A||_{p2 -> q} = ||A^T||_{q' -> p2}; q' is p1 or pinf here
        return brute_matrix_norm(A.T, norms.dual_tag(dst), "p2")
    return norms.vector_norm(verts @ A.T, dst, axis=1).max()


@settings(max_examples=300, deadline=None)
@given(A=small, src=st.sampled_from(TAGS), dst=st.sampled_from(TAGS))
def test_matrix_norm_matches_oracle(A, src, dst):
    mn = norms.matrix_norm(A, src, dst)
    assert mn.exact
    ref = brute_matrix_norm(A, src, dst)
    assert abs(mn.value - ref) <= 1e-10 * max(1.0, ref)
    # the witness is a unit vector attaining the value
    assert norms.vector_norm(mn.witness, src) <= 1 + 1e-12
    assert abs(norms.vector_norm(A @ mn.witness, dst) - mn.value) <= 1e-10 * max(1.0, ref)


def test_large_pinf_source_gives_interval():
    A = np.random.default_rng(0).standard_normal((3, 20))
    mn = norms.matrix_norm(A, "pinf", "p2", max_vertex_dim=8)
    assert not mn.exact
    exact = norms.matrix_norm(A, "pinf", "p2", max_vertex_dim=20)
    assert mn.lower <= exact.value <= mn.upper


def test_large_p2_to_p1_gives_interval():
    A = np.random.default_rng(1).standard_normal((20, 3))
    mn = norms.matrix_norm(A, "p2", "p1", max_vertex_dim=8)
    assert not mn.exact
    exact = norms.matrix_norm(A, "p2", "p1", max_vertex_dim=20)
    assert mn.lower <= exact.value <= mn.upper


@settings(max_examples=200)
@given(w=arrays(float, st.integers(1, 6), elements=st.floats(-5, 5, allow_nan=False)),
       tag=st.sampled_from(TAGS))
def test_dual_attainer(w, tag):
    u = norms.dual_attainer(w, tag)
    assert norms.vector_norm(u, tag) <= 1 + 1e-12
    assert abs(u @ w - norms.vector_norm(w, norms.dual_tag(tag))) <= 1e-12 * (1 + np.abs(w).sum())


@pytest.mark.parametrize("tag", TAGS)
def test_weight_power_turns_weighted_into_plain(tag):
    rng = np.random.default_rng(3)
    w, v = rng.uniform(0.1, 3, 5), rng.standard_normal(5)
    plain = norms.vector_norm(norms.weight_power(w, tag) * v, tag)
    assert np.isclose(norms.weighted_norm(v, w, tag), plain, rtol=1e-14)


def test_unknown_tag():
    with pytest.raises(ValueError):
        norms.check_tag("p3")
