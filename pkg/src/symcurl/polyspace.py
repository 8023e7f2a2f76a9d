"""Scalar and matrix-valued polynomial spaces, Lagrange lattices and quadrature.

Polynomials are represented by monomials in scaled local coordinates
``xi = (x - origin) / scale``.  For tetrahedra the space is all monomials of
total degree ``<= k``; for (axis-aligned) hexahedra all monomials of degree
``<= k`` in each coordinate.  Both spaces are invariant under the diagonal
affine change of variables, so the represented space is the physical one.
"""

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

import numpy as np

from symcurl import _kernels

TET = "tet"
HEX = "hex"

REF_TET_VERTICES = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
# lexicographic corner order: corner c has coordinates (c & 1, c >> 1 & 1, c >> 2 & 1)
REF_HEX_VERTICES = np.array([[c & 1, c >> 1 & 1, c >> 2 & 1] for c in range(8)], dtype=float)

TET_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
TET_FACES = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)]
HEX_EDGES = [
    (0, 1), (2, 3), (4, 5), (6, 7),  # x-directed
    (0, 2), (1, 3), (4, 6), (5, 7),  # y-directed
    (0, 4), (1, 5), (2, 6), (3, 7),  # z-directed
]
HEX_FACES = [
    (0, 2, 4, 6), (1, 3, 5, 7),  # x = 0, 1
    (0, 1, 4, 5), (2, 3, 6, 7),  # y = 0, 1
    (0, 1, 2, 3), (4, 5, 6, 7),  # z = 0, 1
]


def scalar_dimension(cell_kind, k):
    if cell_kind == TET:
        return comb(k + 3, 3)
    if cell_kind == HEX:
        return (k + 1) ** 3
    raise ValueError(f"unknown cell kind {cell_kind!r}")


def simplex_indices(nvert, k, interior=False):
    """Multi-indices of length ``nvert`` summing to ``k`` (reverse-lexicographic order).

    With ``interior=True`` only strictly positive entries are kept.
    """
    lo = 1 if interior else 0
    out = []
    for alpha in itertools.product(range(k, lo - 1, -1), repeat=nvert):
        if sum(alpha) == k:
            out.append(alpha)
    return out


# ----------------------------------------------------------------------------
# Lagrange lattices

@dataclass
class LagrangeLattice:
    """Equispaced lattice on a reference cell.

    ``tags[i]`` is ``(kind, local_entity, index)`` with kind one of
    ``vertex``, ``edge``, ``face``, ``cell``.
    """

    cell_kind: str
    k: int
    points: np.ndarray
    tags: list

    def count(self, kind):
        return sum(1 for t in self.tags if t[0] == kind)


def _classify(coords, entities, kind):
    for e, verts in enumerate(entities):
        if all(coords[v] for v in verts):
            return e
    raise AssertionError("lattice point does not belong to any entity of kind " + kind)


def lattice(cell_kind, k):
    if k < 1:
        raise ValueError("degree must be at least 1")
    points, tags = [], []
    counters = {}
    if cell_kind == TET:
        for alpha in simplex_indices(4, k):
            support = tuple(i for i, a in enumerate(alpha) if a > 0)
            points.append(np.dot(alpha, REF_TET_VERTICES) / k)
            kind = {1: "vertex", 2: "edge", 3: "face", 4: "cell"}[len(support)]
            entity = {
                1: lambda: support[0],
                2: lambda: TET_EDGES.index(support),
                3: lambda: TET_FACES.index(support),
                4: lambda: 0,
            }[len(support)]()
            key = (kind, entity)
            counters[key] = counters.get(key, 0) + 1
            tags.append((kind, entity, counters[key] - 1))
    elif cell_kind == HEX:
        for kk, jj, ii in itertools.product(range(k + 1), repeat=3):
            idx = (ii, jj, kk)
            points.append(np.array(idx, dtype=float) / k)
            nbound = sum(1 for v in idx if v in (0, k))
            kind = {3: "vertex", 2: "edge", 1: "face", 0: "cell"}[nbound]
            # corners of the reference hex touched by this point
            near = [c for c in range(8) if all(
                (idx[d] == 0 and not (c >> d & 1)) or (idx[d] == k and (c >> d & 1)) or 0 < idx[d] < k
                for d in range(3))]
            if kind == "vertex":
                entity = near[0]
            elif kind == "edge":
                entity = next(e for e, ev in enumerate(HEX_EDGES) if set(ev) == set(near))
            elif kind == "face":
                entity = next(f for f, fv in enumerate(HEX_FACES) if set(fv) == set(near))
            else:
                entity = 0
            key = (kind, entity)
            counters[key] = counters.get(key, 0) + 1
            tags.append((kind, entity, counters[key] - 1))
    else:
        raise ValueError(f"unknown cell kind {cell_kind!r}")
    return LagrangeLattice(cell_kind, k, np.array(points), tags)


# ----------------------------------------------------------------------------
# Bases

@lru_cache(maxsize=None)
def exponents(cell_kind, k):
    if cell_kind == TET:
        exps = [e for e in itertools.product(range(k + 1), repeat=3) if sum(e) <= k]
    elif cell_kind == HEX:
        exps = list(itertools.product(range(k + 1), repeat=3))
    else:
        raise ValueError(f"unknown cell kind {cell_kind!r}")
    exps.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
    arr = np.array(exps, dtype=np.int64)
    arr.setflags(write=False)
    return arr


@dataclass
class PolyBasis:
    """Monomial basis of ``P_k`` (tet) or ``Q_k`` (hex) around ``origin`` with per-axis ``scale``."""

    cell_kind: str
    k: int
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    scale: np.ndarray = field(default_factory=lambda: np.ones(3))

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("degree must be non-negative")
        self.exps = exponents(self.cell_kind, self.k)
        self.origin = np.asarray(self.origin, dtype=float)
        self.scale = np.broadcast_to(np.asarray(self.scale, dtype=float), (3,)).copy()

    @property
    def dim(self):
        return len(self.exps)

    def _local(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return (points - self.origin) / self.scale

    def eval(self, points):
        """Values, shape ``(npoints, dim)``."""
        return _kernels.monomials(self._local(points), self.exps, self.k)

    def grad(self, points):
        """Physical gradients, shape ``(npoints, dim, 3)``."""
        return _kernels.monomial_gradients(self._local(points), self.exps, self.k) / self.scale


def for_cell(cell_kind, k, vertices):
    """Basis centred on a cell, scaled by its extent (keeps the Vandermonde well conditioned)."""
    vertices = np.asarray(vertices, dtype=float)
    lo, hi = vertices.min(axis=0), vertices.max(axis=0)
    origin = 0.5 * (lo + hi)
    if cell_kind == HEX:
        scale = 0.5 * (hi - lo)
    else:
        scale = np.full(3, 0.5 * np.max(hi - lo))
    return PolyBasis(cell_kind, k, origin, scale)


def eval_basis(basis, point):
    return basis.eval(point)[0]


def eval_grad(basis, point):
    return basis.grad(point)[0]


def matrix_poly_eval(basis, coeffs, points):
    """Evaluate ``sum_b coeffs[b] * phi_b`` at points; returns ``(npoints, 3, 3)``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[0] != basis.dim:
        raise ValueError(f"expected {basis.dim} coefficient matrices, got {coeffs.shape[0]}")
    return _kernels.matrix_values(basis.eval(points), coeffs.reshape(basis.dim, 9))


def curl_rows(grad):
    """Row-wise curl from a gradient array ``G[..., i, j, l] = d U_ij / d x_l``."""
    out = np.empty(grad.shape[:-1])
    out[..., 0] = grad[..., 2, 1] - grad[..., 1, 2]
    out[..., 1] = grad[..., 0, 2] - grad[..., 2, 0]
    out[..., 2] = grad[..., 1, 0] - grad[..., 0, 1]
    return out


def row_curl(basis, coeffs, points):
    """Curl applied to each row of the matrix polynomial; returns ``(npoints, 3, 3)``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[0] != basis.dim:
        raise ValueError(f"expected {basis.dim} coefficient matrices, got {coeffs.shape[0]}")
    return _kernels.matrix_curls(basis.grad(points), coeffs.reshape(basis.dim, 9))


# ----------------------------------------------------------------------------
# Quadrature

@dataclass
class Quadrature:
    """Rule on a reference cell; ``kind`` in ``tet``, ``hex``, ``tri``, ``quad``."""

    kind: str
    degree: int
    points: np.ndarray
    weights: np.ndarray

    def map_to(self, vertices):
        """Affine image on a physical cell given by its first ``dim+1`` defining vertices.

        For ``hex``/``quad`` the cell must be a parallelepiped/parallelogram given by its
        lexicographically ordered corners.
        """
        vertices = np.asarray(vertices, dtype=float)
        v0 = vertices[0]
        if self.kind in (TET, "tri"):
            J = (vertices[1:] - v0).T
        elif self.kind == HEX:
            J = np.stack([vertices[1] - v0, vertices[2] - v0, vertices[4] - v0], axis=1)
        else:
            J = np.stack([vertices[1] - v0, vertices[2] - v0], axis=1)
        points = v0 + self.points @ J.T
        if J.shape[1] == 3:
            jac = abs(np.linalg.det(J))
        else:
            jac = np.linalg.norm(np.cross(J[:, 0], J[:, 1]))
        return points, self.weights * jac


def _exact_monomial_integral(kind, e):
    if kind in (HEX, "quad"):
        return float(np.prod([1.0 / (a + 1) for a in e]))
    dim = len(e)
    return float(np.prod([factorial(a) for a in e])) / factorial(sum(e) + dim)


def _duffy(dim, d):
    rules = [np.polynomial.legendre.leggauss(int(np.ceil((d + 1 + dim - 1 - a) / 2))) for a in range(dim)]
    grids = np.meshgrid(*[0.5 * (r[0] + 1.0) for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[0.5 * r[1] for r in rules], indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    x = np.empty_like(u)
    rem = np.ones(len(u))
    for a in range(dim):
        x[:, a] = u[:, a] * rem
        if a < dim - 1:
            rem = rem * (1.0 - u[:, a])
    # Jacobian of the collapse: prod_{a<dim-1} (1-u_a)^(dim-1-a)
    for a in range(dim - 1):
        w = w * (1.0 - u[:, a]) ** (dim - 1 - a)
    return x, w


@lru_cache(maxsize=None)
def quadrature(kind, d):
    """Quadrature rule on the reference ``tet``, ``hex``, ``tri`` or ``quad``, exact to degree ``d``.

    Exactness is checked on every monomial of degree ``<= d`` before the rule is returned.
    """
    if d < 1:
        raise ValueError("exactness degree must be at least 1")
    if kind in (HEX, "quad"):
        dim = 3 if kind == HEX else 2
        x, w = np.polynomial.legendre.leggauss(int(np.ceil((d + 1) / 2)))
        x, w = 0.5 * (x + 1.0), 0.5 * w
        pts = np.array(list(itertools.product(x, repeat=dim)))
        wts = np.prod(np.array(list(itertools.product(w, repeat=dim))), axis=1)
        monos = [e for e in itertools.product(range(d + 1), repeat=dim)]
    elif kind in (TET, "tri"):
        dim = 3 if kind == TET else 2
        pts, wts = _duffy(dim, d)
        monos = [e for e in itertools.product(range(d + 1), repeat=dim) if sum(e) <= d]
    else:
        raise ValueError(f"unknown quadrature domain {kind!r}")
    for e in monos:
        exact = _exact_monomial_integral(kind, e)
        approx = float(np.dot(wts, np.prod(pts ** np.array(e), axis=1)))
        if abs(approx - exact) > 1e-12 * abs(exact):
            raise AssertionError(f"quadrature {kind}/{d} not exact for monomial {e}")
    pts.setflags(write=False)
    wts.setflags(write=False)
    return Quadrature(kind, d, pts, wts)
