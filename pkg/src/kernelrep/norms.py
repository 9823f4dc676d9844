"""Finite-dimensional l^p machinery shared by every other module.

Norm tags are the strings ``"p1"``, ``"p2"`` and ``"pinf"``.  Matrix norms
``l^src -> l^dst`` come back as :class:`MatrixNorm` records carrying a
norm-attaining unit vector, so callers can build witnesses without redoing
the search.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidSpace

NORM_TAGS = ("p1", "p2", "pinf")
EXPONENT = {"p1": 1.0, "p2": 2.0, "pinf": math.inf}
DUAL_TAG = {"p1": "pinf", "p2": "p2", "pinf": "p1"}

# Largest cube/sign-vector dimension enumerated exactly (2**(d-1) vertices).
MAX_VERTEX_DIM = 16


def check_tag(tag: str) -> str:
    if tag not in EXPONENT:
        raise InvalidSpace(f"unknown norm tag {tag!r}; expected one of {NORM_TAGS}")
    return tag


def dual_tag(tag: str) -> str:
    return DUAL_TAG[check_tag(tag)]


def _scaled_l2(values, weights, axis):
    """``sqrt(sum w v^2)`` scaled by the largest ``|v|`` so tiny and huge
    entries neither underflow nor overflow."""
    scale = np.abs(values).max(axis=axis, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    r = values / safe
    return np.squeeze(safe, axis=axis) * np.sqrt((weights * r * r).sum(axis=axis))


def vector_norm(v, tag: str, axis=-1):
    """l^p norm of ``v`` along ``axis`` (scalar for 1-D input)."""
    v = np.asarray(v, dtype=float)
    if tag == "p1":
        return np.abs(v).sum(axis=axis)
    if tag == "p2":
        return _scaled_l2(v, 1.0, axis)
    if tag == "pinf":
        return np.abs(v).max(axis=axis)
    raise InvalidSpace(f"unknown norm tag {tag!r}")


def weighted_norm(values, weights, tag: str, axis=-1):
    """``(sum w |v|^p)^(1/p)`` along ``axis``; the weights are ignored for p = inf."""
    values = np.abs(np.asarray(values, dtype=float))
    if tag == "pinf":
        return values.max(axis=axis)
    weights = np.asarray(weights, dtype=float)
    if tag == "p1":
        return (weights * values).sum(axis=axis)
    if tag == "p2":
        return _scaled_l2(values, weights, axis)
    raise InvalidSpace(f"unknown norm tag {tag!r}")


def weight_power(weights, tag: str, sign: float = 1.0) -> np.ndarray:
    """``weights ** (sign / p)``: the diagonal scaling that makes a weighted
    l^p norm a plain one."""
    weights = np.asarray(weights, dtype=float)
    if tag == "pinf":
        return np.ones_like(weights)
    return weights ** (sign / EXPONENT[tag])


def _signs(w):
    s = np.sign(w)
    s[s == 0] = 1.0
    return s


def dual_attainer(w, tag: str) -> np.ndarray:
    """Unit vector ``u`` in the ``tag`` ball with ``u @ w == ||w||_dual``."""
    w = np.asarray(w, dtype=float)
    u = np.zeros_like(w)
    if w.size == 0:
        return u
    if tag == "p1":
        j = int(np.argmax(np.abs(w)))
        u[j] = 1.0 if w[j] >= 0 else -1.0
        return u
    if tag == "p2":
        n = float(np.sqrt(w @ w))
        if n == 0.0:
            u[0] = 1.0
            return u
        return w / n
    if tag == "pinf":
        return _signs(w)
    raise InvalidSpace(f"unknown norm tag {tag!r}")


@dataclass(frozen=True)
class MatrixNorm:
    value: float
    exact: bool
    lower: float
    upper: float
    witness: np.ndarray


def _exact(value, witness):
    value = float(value)
    return MatrixNorm(value, True, value, value, witness)


def _sign_vertices(n: int) -> np.ndarray:
    # Half the cube: x and -x give the same norm.
    rest = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1)), dtype=float)
    rest = rest.reshape(2 ** (n - 1), n - 1)
    return np.hstack([np.ones((rest.shape[0], 1)), rest])


def matrix_norm(A, src: str, dst: str, *, max_vertex_dim: int = MAX_VERTEX_DIM,
                samples: int = 4096, seed: int = 0) -> MatrixNorm:
    """Operator norm of ``A`` from ``l^src`` to ``l^dst``.

    Closed forms: ``p1 -> any`` (largest column norm), ``any -> pinf``
    (largest dual row norm) and ``p2 -> p2`` (largest singular value).  The
    two remaining pairs are maxima of a convex function over a polytope and
    are computed exactly by vertex enumeration while the relevant dimension
    is at most ``max_vertex_dim``: ``pinf -> q`` over the sign vectors of the
    cube, ``p2 -> p1`` through ``||A||_{2->1} = max_s ||A^T s||_2``.  Larger
    instances fall back to a sampled lower bound and a triangle-inequality
    upper bound with ``exact=False``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {A.shape}")
    check_tag(src)
    check_tag(dst)
    m, n = A.shape

    if src == "p1":
        cols = vector_norm(A, dst, axis=0)
        j = int(np.argmax(cols))
        return _exact(cols[j], np.eye(n)[j])
    if dst == "pinf":
        rows = vector_norm(A, dual_tag(src), axis=1)
        i = int(np.argmax(rows))
        return _exact(rows[i], dual_attainer(A[i], src))
    if src == "p2" and dst == "p2":
        _, s, vt = np.linalg.svd(A)
        return _exact(s[0], vt[0].copy())
    if src == "pinf" and n <= max_vertex_dim:
        verts = _sign_vertices(n)
        vals = vector_norm(verts @ A.T, dst, axis=1)
        k = int(np.argmax(vals))
        return _exact(vals[k], verts[k])
    if src == "p2" and dst == "p1" and m <= max_vertex_dim:
        verts = _sign_vertices(m)
        images = verts @ A
        vals = vector_norm(images, "p2", axis=1)
        k = int(np.argmax(vals))
        return _exact(vals[k], dual_attainer(images[k], "p2"))

    # Too large to enumerate: certified interval.
    rng = np.random.default_rng(seed)
    if src == "pinf":
        cand = _signs(rng.standard_normal((samples, n)))
        upper = float(vector_norm(A, dst, axis=0).sum())
    else:
        cand = rng.standard_normal((samples, n))
        cand /= vector_norm(cand, src, axis=1)[:, None]
        upper = float(math.sqrt(m) * np.linalg.norm(A, 2))
    vals = vector_norm(cand @ A.T, dst, axis=1)
    k = int(np.argmax(vals))
    lower = float(vals[k])
    upper = max(upper, lower)
    return MatrixNorm(0.5 * (lower + upper), False, lower, upper, cand[k])
