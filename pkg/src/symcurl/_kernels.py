"""Hot kernels: monomial tables, their gradients and matrix-polynomial contractions.

The compiled extension ``symcurl._ckernels`` is used when it was built; otherwise
(or with ``SYMCURL_PURE_PYTHON=1``) the numpy implementations below are used.
``BACKEND`` names the active implementation.
"""

import os

import numpy as np


def _power_table(xi, k):
    # P[p, d, e] = xi[p, d] ** e
    P = np.ones(xi.shape + (k + 1,))
    for e in range(1, k + 1):
        P[..., e] = P[..., e - 1] * xi
    return P


def py_monomials(xi, exps, k):
    P = _power_table(xi, k)
    return P[:, 0, exps[:, 0]] * P[:, 1, exps[:, 1]] * P[:, 2, exps[:, 2]]


def py_monomial_gradients(xi, exps, k):
    P = _power_table(xi, k)
    # dP[p, d, e] = e * xi ** (e - 1)
    dP = np.zeros_like(P)
    dP[..., 1:] = P[..., :-1] * np.arange(1, k + 1)
    px, py, pz = (P[:, d, exps[:, d]] for d in range(3))
    dx, dy, dz = (dP[:, d, exps[:, d]] for d in range(3))
    return np.stack([dx * py * pz, px * dy * pz, px * py * dz], axis=-1)


def py_matrix_values(phi, coeffs):
    return (phi @ np.reshape(coeffs, (phi.shape[1], 9))).reshape(-1, 3, 3)


def py_matrix_curls(dphi, coeffs):
    G = np.einsum("pbl,bij->pijl", dphi, np.reshape(coeffs, (dphi.shape[1], 3, 3)))
    out = np.empty(G.shape[:-1])
    out[..., 0] = G[..., 2, 1] - G[..., 1, 2]
    out[..., 1] = G[..., 0, 2] - G[..., 2, 0]
    out[..., 2] = G[..., 1, 0] - G[..., 0, 1]
    return out


PYTHON_KERNELS = {
    "monomials": py_monomials,
    "monomial_gradients": py_monomial_gradients,
    "matrix_values": py_matrix_values,
    "matrix_curls": py_matrix_curls,
}

COMPILED_KERNELS = {}
try:
    if os.environ.get("SYMCURL_PURE_PYTHON"):
        raise ImportError("pure Python kernels requested")
    from symcurl import _ckernels
except ImportError:
    pass
else:
    # a plain BLAS matmul already beats a hand loop for matrix_values
    COMPILED_KERNELS = {name: getattr(_ckernels, name) for name in PYTHON_KERNELS if hasattr(_ckernels, name)}

BACKEND = "cython" if COMPILED_KERNELS else "numpy"
_active = {**PYTHON_KERNELS, **COMPILED_KERNELS}
monomials = _active["monomials"]
monomial_gradients = _active["monomial_gradients"]
matrix_values = _active["matrix_values"]
matrix_curls = _active["matrix_curls"]
