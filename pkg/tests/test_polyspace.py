from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symcurl import polyspace
from symcurl.polyspace import HEX, TET


@pytest.mark.parametrize("k", range(1, 6))
def test_scalar_dimensions(k):
    assert polyspace.scalar_dimension(TET, k) == comb(k + 3, 3)
    assert polyspace.scalar_dimension(HEX, k) == (k + 1) ** 3
    assert len(polyspace.exponents(TET, k)) == comb(k + 3, 3)
    assert len(polyspace.exponents(HEX, k)) == (k + 1) ** 3


@pytest.mark.parametrize("k", range(1, 5))
def test_lattice_classification_counts(k):
    lat = polyspace.lattice(TET, k)
    assert lat.count("vertex") == 4
    assert lat.count("edge") == 6 * (k - 1)
    assert lat.count("face") == 4 * comb(k - 1, 2)
    assert lat.count("cell") == comb(k - 1, 3)
    lat = polyspace.lattice(HEX, k)
    assert lat.count("vertex") == 8
    assert lat.count("edge") == 12 * (k - 1)
    assert lat.count("face") == 6 * (k - 1) ** 2
    assert lat.count("cell") == (k - 1) ** 3


def test_lattice_rejects_degree_zero():
    with pytest.raises(ValueError):
        polyspace.lattice(TET, 0)


@pytest.mark.parametrize("kind", [TET, HEX])
def test_gradient_matches_finite_differences(kind, rng):
    basis = polyspace.PolyBasis(kind, 3, origin=rng.normal(size=3), scale=[0.7, 1.3, 0.9])
    x = rng.uniform(-1, 1, (4, 3))
    G = basis.grad(x)
    h = 1e-6
    for a in range(3):
        dx = np.zeros(3)
        dx[a] = h
        fd = (basis.eval(x + dx) - basis.eval(x - dx)) / (2 * h)
        np.testing.assert_allclose(G[..., a], fd, atol=1e-7)


def test_curl_of_anti_x_is_twice_identity():
    basis = polyspace.PolyBasis(TET, 1)
    coeffs = np.zeros((basis.dim, 3, 3))
    # U(x) = anti(x): U_ij = -eps_ijk x_k
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k], eps[j, i, k] = 1.0, -1.0
    for b, e in enumerate(basis.exps):
        if sum(e) == 1:
            coeffs[b] = -eps[:, :, int(np.argmax(e))]
    x = np.random.default_rng(0).normal(size=(3, 3))
    U = polyspace.matrix_poly_eval(basis, coeffs, x)
    np.testing.assert_allclose(U[0], [[0, -x[0, 2], x[0, 1]], [x[0, 2], 0, -x[0, 0]], [-x[0, 1], x[0, 0], 0]])
    np.testing.assert_allclose(polyspace.row_curl(basis, coeffs, x), np.broadcast_to(2 * np.eye(3), (3, 3, 3)),
                               atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_curl_of_gradient_rows_vanishes(seed):
    rng = np.random.default_rng(seed)
    basis = polyspace.PolyBasis(TET, 3)
    # U_ij = d phi_i / d x_j for three scalar polynomials phi_i of degree 4
    scal = polyspace.PolyBasis(TET, 4)
    c = rng.normal(size=(3, scal.dim))
    x = rng.uniform(-1, 1, (20, 3))
    # fit rows of U into P_3 by least squares on many points (exact since grad phi is in P_3)
    pts = rng.uniform(-1, 1, (200, 3))
    rows = np.einsum("ib,pbj->pij", c, scal.grad(pts)).reshape(200, 9)
    coeffs, *_ = np.linalg.lstsq(basis.eval(pts), rows, rcond=None)
    curl = polyspace.row_curl(basis, coeffs.reshape(-1, 3, 3), x)
    assert np.abs(curl).max() < 1e-8 * (1 + np.abs(c).max())


def test_coefficient_length_checked():
    basis = polyspace.PolyBasis(HEX, 1)
    with pytest.raises(ValueError):
        polyspace.matrix_poly_eval(basis, np.zeros((3, 3, 3)), np.zeros((1, 3)))
    with pytest.raises(ValueError):
        polyspace.row_curl(basis, np.zeros((3, 3, 3)), np.zeros((1, 3)))


def _tet_monomial_integral(e):
    return np.prod([factorial(a) for a in e]) / factorial(sum(e) + 3)


@pytest.mark.parametrize("d", [1, 2, 5, 8])
def test_tet_quadrature_exact_on_monomials(d):
    q = polyspace.quadrature(TET, d)
    for e in polyspace.simplex_indices(4, d):
        e = e[:3]
        got = np.dot(q.weights, np.prod(q.points ** np.array(e), axis=1))
        assert got == pytest.approx(_tet_monomial_integral(e), rel=1e-12)


def test_mapped_quadrature_volume_and_moment(rng):
    P = rng.normal(size=(4, 3))
    pts, wts = polyspace.quadrature(TET, 2).map_to(P)
    vol = abs(np.linalg.det((P[1:] - P[0]).T)) / 6
    assert wts.sum() == pytest.approx(vol, rel=1e-12)
    np.testing.assert_allclose(wts @ pts / vol, P.mean(axis=0), atol=1e-12)
    lo, hi = np.array([0.5, -1.0, 2.0]), np.array([1.5, 0.0, 4.0])
    corners = np.array([[(hi if b >> a & 1 else lo)[a] for a in range(3)] for b in range(8)])
    pts, wts = polyspace.quadrature(HEX, 4).map_to(corners)
    assert wts.sum() == pytest.approx(np.prod(hi - lo))
    # int x^2 over [0.5,1.5] = (1.5^3 - 0.5^3)/3
    assert np.dot(wts, pts[:, 0] ** 2) == pytest.approx((1.5 ** 3 - 0.125) / 3 * 2.0)


def test_face_rules_measure():
    pts, wts = polyspace.quadrature("tri", 3).map_to(np.array([[0, 0, 0], [2, 0, 0], [0, 0, 3.0]]))
    assert wts.sum() == pytest.approx(3.0)
    pts, wts = polyspace.quadrature("quad", 3).map_to(np.array([[0, 0, 0], [2, 0, 0], [0, 3.0, 0]]))
    assert wts.sum() == pytest.approx(6.0)


def test_for_cell_scaling():
    b = polyspace.for_cell(HEX, 1, [[0, 0, 0], [4, 2, 1]])
    np.testing.assert_allclose(b.origin, [2, 1, 0.5])
    np.testing.assert_allclose(b.scale, [2, 1, 0.5])
    b = polyspace.for_cell(TET, 1, [[0, 0, 0], [4, 0, 0], [0, 2, 0], [0, 0, 1]])
    np.testing.assert_allclose(b.scale, [2, 2, 2])
