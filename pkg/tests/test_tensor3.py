import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from symcurl import tensor3

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)
mat3 = arrays(np.float64, (3, 3), elements=finite)


def unit_vectors():
    return vec3.filter(lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: v / np.linalg.norm(v))


@given(vec3, vec3)
def test_anti_matches_cross_product(a, b):
    np.testing.assert_allclose(tensor3.anti(a) @ b, np.cross(a, b), atol=1e-12)


@given(vec3)
def test_anti_is_skew(a):
    A = tensor3.anti(a)
    np.testing.assert_array_equal(A, -A.T)


@given(mat3)
def test_sym_dev_decomposition(A):
    S = tensor3.sym(A)
    np.testing.assert_allclose(S, S.T)
    D = tensor3.dev(A)
    assert abs(np.trace(D)) < 1e-12 * (1 + np.abs(A).max())
    np.testing.assert_allclose(D + np.trace(A) / 3 * np.eye(3), A, atol=1e-12)


def test_batched_operations_agree_with_single():
    A = np.random.default_rng(0).normal(size=(5, 3, 3))
    np.testing.assert_allclose(tensor3.dev(A), [tensor3.dev(a) for a in A])
    np.testing.assert_allclose(tensor3.trace(A), np.trace(A, axis1=1, axis2=2))


def test_defect_of_tangential_outer_product():
    # hand computation: e1 (x) e2 @ anti(e3) has row 1 equal to row 2 of anti(e3) = e1
    E = np.eye(3)
    U = np.outer(E[0], E[1])
    np.testing.assert_allclose(tensor3.conformity_defect(U, E[2]), np.outer(E[0], E[0]))
    np.testing.assert_allclose(tensor3.curl_jump(U, E[2]), np.outer(E[0], E[0]))


def test_identity_jump_is_pure_skew():
    n = tensor3.unit([1.0, 2.0, -0.5])
    np.testing.assert_allclose(tensor3.conformity_defect(np.eye(3), n), 0.0, atol=1e-15)
    assert np.linalg.norm(tensor3.curl_jump(np.eye(3), n)) == pytest.approx(np.sqrt(2.0), abs=1e-14)


def test_non_unit_inputs_rejected():
    with pytest.raises(ValueError):
        tensor3.conformity_defect(np.eye(3), [0.0, 0.0, 2.0])
    with pytest.raises(ValueError):
        tensor3.orthonormal_complement([1.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        tensor3.unit(np.zeros(3))


@given(mat3, unit_vectors(), st.floats(-5, 5))
def test_defect_is_linear(U, n, s):
    np.testing.assert_allclose(tensor3.conformity_defect(s * U, n), s * tensor3.conformity_defect(U, n),
                               atol=1e-10)


@given(unit_vectors())
def test_orthonormal_complement_is_right_handed(t):
    n1, n2 = tensor3.orthonormal_complement(t)
    F = np.array([t, n1, n2])
    np.testing.assert_allclose(F @ F.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(F) == pytest.approx(1.0, abs=1e-12)


def test_orthonormal_complement_tie_break():
    # all components tie: first axis is projected
    t = tensor3.unit([1.0, 1.0, 1.0])
    n1, _ = tensor3.orthonormal_complement(t)
    e = np.array([1.0, 0.0, 0.0])
    np.testing.assert_allclose(n1, tensor3.unit(e - t[0] * t))


@settings(max_examples=50)
@given(arrays(np.float64, (3, 3), elements=st.floats(-1, 1)))
def test_face_frame_batched_matches_scalar(P):
    assume(np.linalg.norm(np.cross(P[1] - P[0], P[2] - P[0])) > 1e-3)
    f = tensor3.face_frame(*P)
    g = tensor3.face_frames(P[:1], P[1:2], P[2:])[0]
    for a, b in zip(f.vectors, g.vectors):
        np.testing.assert_allclose(a, b, atol=1e-14)
    assert abs(np.dot(f.normal, P[1] - P[0])) < 1e-12


def test_collinear_face_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        tensor3.face_frame([0, 0, 0], [1, 1, 1], [2, 2, 2])


def test_edge_frame_batched_matches_scalar(rng):
    lo, hi = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
    for f, a, b in zip(tensor3.edge_frames(lo, hi), lo, hi):
        g = tensor3.edge_frame(a, b)
        for u, v in zip(f.vectors, g.vectors):
            np.testing.assert_allclose(u, v, atol=1e-14)
