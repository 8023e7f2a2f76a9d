# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in :mod:`symcurl._kernels`."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef void _powers(const double[:, ::1] xi, Py_ssize_t p, int k, double* P) noexcept nogil:
    # P[d * (k + 1) + e] = xi[p, d] ** e
    cdef int d, e
    for d in range(3):
        P[d * (k + 1)] = 1.0
        for e in range(1, k + 1):
            P[d * (k + 1) + e] = P[d * (k + 1) + e - 1] * xi[p, d]


def monomials(xi, exps, int k):
    cdef const double[:, ::1] X = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const cnp.int64_t[:, ::1] E = np.ascontiguousarray(exps, dtype=np.int64)
    cdef Py_ssize_t npts = X.shape[0], dim = E.shape[0], p, b
    out = np.empty((npts, dim))
    cdef double[:, ::1] O = out
    cdef double P[3 * 32]
    if k >= 32:
        raise ValueError("degree too large")
    with nogil:
        for p in range(npts):
            _powers(X, p, k, P)
            for b in range(dim):
                O[p, b] = P[E[b, 0]] * P[(k + 1) + E[b, 1]] * P[2 * (k + 1) + E[b, 2]]
    return out


def monomial_gradients(xi, exps, int k):
    cdef const double[:, ::1] X = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const cnp.int64_t[:, ::1] E = np.ascontiguousarray(exps, dtype=np.int64)
    cdef Py_ssize_t npts = X.shape[0], dim = E.shape[0], p, b
    cdef int d, e0, e1, e2
    out = np.empty((npts, dim, 3))
    cdef double[:, :, ::1] O = out
    cdef double P[3 * 32]
    cdef double dP[3 * 32]
    cdef double px, py, pz
    if k >= 32:
        raise ValueError("degree too large")
    with nogil:
        for p in range(npts):
            _powers(X, p, k, P)
            for d in range(3):
                dP[d * (k + 1)] = 0.0
                for e0 in range(1, k + 1):
                    dP[d * (k + 1) + e0] = e0 * P[d * (k + 1) + e0 - 1]
            for b in range(dim):
                e0 = <int>E[b, 0]
                e1 = (k + 1) + <int>E[b, 1]
                e2 = 2 * (k + 1) + <int>E[b, 2]
                px = P[e0]
                py = P[e1]
                pz = P[e2]
                O[p, b, 0] = dP[e0] * py * pz
                O[p, b, 1] = px * dP[e1] * pz
                O[p, b, 2] = px * py * dP[e2]
    return out


def matrix_curls(dphi, coeffs):
    """Row-wise curl of ``sum_b phi_b coeffs[b]`` from basis gradients ``dphi[p, b, l]``."""
    cdef const double[:, :, ::1] D = np.ascontiguousarray(dphi, dtype=np.float64)
    cdef const double[:, ::1] C = np.ascontiguousarray(coeffs, dtype=np.float64).reshape(-1, 9)
    cdef Py_ssize_t npts = D.shape[0], dim = D.shape[1], p, b
    cdef int i
    cdef double g0, g1, g2
    out = np.zeros((npts, 9))
    cdef double[:, ::1] O = out
    with nogil:
        for p in range(npts):
            for b in range(dim):
                g0 = D[p, b, 0]
                g1 = D[p, b, 1]
                g2 = D[p, b, 2]
                for i in range(3):
                    # curl of row i: (d1 U_i2 - d2 U_i1, d2 U_i0 - d0 U_i2, d0 U_i1 - d1 U_i0)
                    O[p, 3 * i + 0] += g1 * C[b, 3 * i + 2] - g2 * C[b, 3 * i + 1]
                    O[p, 3 * i + 1] += g2 * C[b, 3 * i + 0] - g0 * C[b, 3 * i + 2]
                    O[p, 3 * i + 2] += g0 * C[b, 3 * i + 1] - g1 * C[b, 3 * i + 0]
    return out.reshape(npts, 3, 3)
