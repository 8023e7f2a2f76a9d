"""Local H(sym Curl) elements: directional point-evaluation DOFs, DOF matrix and nodal basis."""

from dataclasses import dataclass, field

import numpy as np

from symcurl import polyspace, tensor3
from symcurl.mesh import MeshError
from symcurl.polyspace import HEX, TET

COND_LIMIT = 1e12
KERNEL_RTOL = 1e-10

# sharing classes; ``shared_*`` functionals are identified across cells by their key
SHARED_VERTEX_OFFDIAG = "shared_vertex_offdiag"
SHARED_VERTEX_DIAG = "shared_vertex_diag"
SHARED_VERTEX_HEXJOINT = "shared_vertex_hexjoint"
SHARED_VERTEX_HEXEDGE = "shared_vertex_hexedge"
SHARED_EDGE_PLANE = "shared_edge_plane"
SHARED_EDGE_FACE = "shared_edge_face"
SHARED_FACE_NORMAL = "shared_face_normal"
PRIVATE_VERTEX_TRACE = "private_vertex_trace"
PRIVATE_EDGE_IDENTITY = "private_edge_identity"
PRIVATE_FACE_TANGENTIAL = "private_face_tangential"
PRIVATE_INTERIOR = "private_interior"
PRIVATE_VERTEX_IDENTITY_HEX = "private_vertex_identity_hex"

SHARING_CLASSES = (
    SHARED_VERTEX_OFFDIAG, SHARED_VERTEX_DIAG, SHARED_VERTEX_HEXJOINT, SHARED_VERTEX_HEXEDGE,
    SHARED_EDGE_PLANE, SHARED_EDGE_FACE, SHARED_FACE_NORMAL,
    PRIVATE_VERTEX_TRACE, PRIVATE_EDGE_IDENTITY, PRIVATE_FACE_TANGENTIAL, PRIVATE_INTERIOR,
    PRIVATE_VERTEX_IDENTITY_HEX,
)
_CLASS_RANK = {c: i for i, c in enumerate(SHARING_CLASSES)}
_KIND_RANK = {"vertex": 0, "edge": 1, "face": 2, "cell": 3}

OFFDIAG = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]


def _cross(a, b):
    # np.cross carries too much overhead for single 3-vectors
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


class ElementError(RuntimeError):
    """Local DOF matrix is singular or too ill-conditioned for a nodal basis."""


_SHARED = frozenset(c for c in SHARING_CLASSES if c.startswith("shared_"))


def is_shared(sharing_class):
    return sharing_class in _SHARED


@dataclass(eq=False, slots=True)
class DofFunctional:
    """``U -> sum_w w * left^T U(point) right`` (or an entry selector).

    ``owner`` is ``(entity kind, global entity id, point index)``; ``extra`` holds the
    additional global entity that keys the functional (the face of an edge-face DOF,
    the edge of a hex vertex-edge DOF); ``item`` numbers functionals at one point.
    ``weights`` is the 3x3 matrix ``G`` with ``l(U) = sum_ij G_ij U_ij(point)``.
    """

    owner: tuple
    sharing_class: str
    point: np.ndarray
    terms: list = field(default_factory=list)
    selector: tuple = None
    item: int = 0
    extra: int = None
    cell: int = None
    weights: np.ndarray = None
    key: tuple = field(init=False)

    def __post_init__(self):
        if self.weights is None:
            G = weight_matrix(self.terms)
            if self.selector is not None:
                G[self.selector] += 1.0
            self.weights = G
        kind, ent, idx = self.owner
        key = (_KIND_RANK[kind], ent, idx, _CLASS_RANK[self.sharing_class],
               -1 if self.extra is None else self.extra, self.item)
        # private functionals are never identified across cells
        self.key = key if is_shared(self.sharing_class) else key + (self.cell,)

    def __call__(self, U):
        """Apply to the matrix value ``U`` (already evaluated at ``point``)."""
        return float(np.sum(self.weights * U))


# ----------------------------------------------------------------------------
# Condition sets (lists of weight terms), shared by the elements and the kernel audit

def face_conformity_terms(a1, a2, n):
    """The five face conditions whose vanishing gives ``sym(U anti(n)) = 0``."""
    c1, c2 = _cross(n, a1), _cross(n, a2)
    return [
        [(1.0, a1, c1)],
        [(1.0, a2, c2)],
        [(1.0, a1, c2), (1.0, a2, c1)],
        [(1.0, n, c1)],
        [(1.0, n, c2)],
    ]


def face_complement_terms(a1, a2, n):
    c1, c2 = _cross(n, a1), _cross(n, a2)
    return [
        [(1.0, a1, c2), (-1.0, a2, c1)],
        [(1.0, a1, n)],
        [(1.0, a2, n)],
        [(1.0, n, n)],
    ]


def edge_plane_terms(t, ne1, ne2):
    return [[(1.0, ne1, t)], [(1.0, ne2, t)]]


def edge_face_terms(t, nf):
    """Three conditions for the pair (edge tangent ``t``, adjacent face normal ``nf``)."""
    conormal = _cross(t, nf)
    nxt = _cross(nf, t)
    return [
        [(1.0, t, nxt)],
        [(1.0, nf, nxt)],
        [(1.0, t, _cross(nf, conormal)), (1.0, conormal, nxt)],
    ]


def edge_identity_terms(t):
    return [[(1.0, t, t)]]


def hex_joint_terms(n1, n2, n3):
    return [
        [(1.0, n2, _cross(n1, n3)), (1.0, n3, _cross(n1, n2))],
        [(1.0, n3, _cross(n2, n1)), (1.0, n1, _cross(n2, n3))],
    ]


def hex_identity_terms(n1, n2, n3):
    return [[(1.0, n1, _cross(n2, n3)), (1.0, n2, _cross(n1, n3)), (1.0, n3, _cross(n1, n2))]]


def weight_matrix(terms):
    G = np.zeros((3, 3))
    for w, left, right in terms:
        G += w * (left[:, None] * right[None, :])
    return G


def _vertex_full_weights():
    out = []
    for i, j in OFFDIAG:
        G = np.zeros((3, 3))
        G[i, j] = 1.0
        out.append(G)
    out.append(np.diag([1.0, -1.0, 0.0]))
    out.append(np.diag([0.0, 1.0, -1.0]))
    return out


# ----------------------------------------------------------------------------
# DOF lists

def _templates(sharing_class, term_lists, extra=None):
    return [(sharing_class, r, extra, terms, weight_matrix(terms)) for r, terms in enumerate(term_lists)]


def _emit(dofs, owner, x, cell, templates):
    for cls, item, extra, terms, G in templates:
        dofs.append(DofFunctional(owner, cls, x, terms, None, item, extra, cell, G))


_E = np.eye(3)
_VERTEX_FULL = (
    _templates(SHARED_VERTEX_OFFDIAG, [[(1.0, _E[i], _E[j])] for i, j in OFFDIAG])
    + _templates(SHARED_VERTEX_DIAG, [[(1.0, _E[0], _E[0]), (-1.0, _E[1], _E[1])],
                                      [(1.0, _E[1], _E[1]), (-1.0, _E[2], _E[2])]])
    + _templates(PRIVATE_VERTEX_TRACE, [[(1.0, _E[i], _E[i]) for i in range(3)]])
)


def _vertex_full_dofs(mesh, cell, v, x, dofs):
    _emit(dofs, ("vertex", v, 0), x, cell, _VERTEX_FULL)


def _vertex_hex_dofs(mesh, cell, v, x, dofs):
    n1, n2, n3 = mesh.vertex_frames[v].vectors
    templates = _templates(SHARED_VERTEX_HEXJOINT, hex_joint_terms(n1, n2, n3))
    # the cell's edges at v, ordered as E_1, E_2, E_3 (edge E_i is parallel to n_i)
    edges = [e for e in mesh.cell_edges[cell] if v in mesh.edges[e]]
    tangents = [mesh.edge_frames[e].tangent for e in edges]
    order = [int(np.argmax([abs(np.dot(t, ax)) for t in tangents])) for ax in (n1, n2, n3)]
    for e in (edges[i] for i in order):
        templates += _templates(SHARED_VERTEX_HEXEDGE, edge_plane_terms(*mesh.edge_frames[e].vectors), int(e))
    templates += _templates(PRIVATE_VERTEX_IDENTITY_HEX, hex_identity_terms(n1, n2, n3))
    _emit(dofs, ("vertex", v, 0), x, cell, templates)


def _edge_dofs(mesh, cell, e, k, dofs):
    t, ne1, ne2 = mesh.edge_frames[e].vectors
    faces = sorted(int(f) for f in mesh.cell_faces[cell] if e in mesh.face_edges[f])
    templates = _templates(SHARED_EDGE_PLANE, edge_plane_terms(t, ne1, ne2))
    for f in faces:
        templates += _templates(SHARED_EDGE_FACE, edge_face_terms(t, mesh.face_frames[f].normal), f)
    templates += _templates(PRIVATE_EDGE_IDENTITY, edge_identity_terms(t))
    for p, x in enumerate(mesh.edge_points(e, k)):
        _emit(dofs, ("edge", e, p), x, cell, templates)


def _face_dofs(mesh, cell, f, k, dofs):
    n, a1, a2 = mesh.face_frames[f].vectors
    templates = (_templates(SHARED_FACE_NORMAL, face_conformity_terms(a1, a2, n))
                 + _templates(PRIVATE_FACE_TANGENTIAL, face_complement_terms(a1, a2, n)))
    for p, x in enumerate(mesh.face_points(f, k)):
        _emit(dofs, ("face", f, p), x, cell, templates)


_INTERIOR = [(PRIVATE_INTERIOR, 3 * i + j, None, [(1.0, _E[i], _E[j])], np.outer(_E[i], _E[j]))
             for i in range(3) for j in range(3)]


def _interior_dofs(mesh, cell, k, dofs):
    for p, x in enumerate(mesh.cell_points(cell, k)):
        _emit(dofs, ("cell", cell, p), x, cell, _INTERIOR)


def _cell_dofs(mesh, cell, k, vertex_dofs):
    if k < 1:
        raise ValueError("degree must be at least 1")
    if mesh.edge_frames is None or mesh.face_frames is None:
        raise MeshError("mesh frames have not been derived")
    cell = int(cell)
    dofs = []
    for v in sorted(int(v) for v in mesh.cells[cell]):
        vertex_dofs(mesh, cell, v, mesh.vertices[v], dofs)
    if k >= 2:
        for e in sorted(int(e) for e in mesh.cell_edges[cell]):
            _edge_dofs(mesh, cell, e, k, dofs)
        for f in sorted(int(f) for f in mesh.cell_faces[cell]):
            _face_dofs(mesh, cell, f, k, dofs)
        _interior_dofs(mesh, cell, k, dofs)
    return dofs


def tet_dofs(cell, mesh, k):
    """Ordered DOF functionals of the degree-``k`` tetrahedral element on ``cell``."""
    if mesh.kind != TET:
        raise MeshError("tet_dofs needs a tetrahedral mesh")
    return _cell_dofs(mesh, cell, k, _vertex_full_dofs)


def hex_dofs(cell, mesh, k, vertex_dofs="hex"):
    """Ordered DOF functionals of the degree-``k`` hexahedral element.

    ``vertex_dofs="hex"`` uses the three-normal vertex functionals;
    ``vertex_dofs="full"`` uses the tetrahedral (full continuity) vertex functionals.
    """
    if mesh.kind != HEX:
        raise MeshError("hex_dofs needs a hexahedral mesh")
    if vertex_dofs == "full":
        return _cell_dofs(mesh, cell, k, _vertex_full_dofs)
    if vertex_dofs != "hex":
        raise ValueError(f"unknown vertex DOF style {vertex_dofs!r}")
    ok = mesh.three_normal_flags
    if not all(ok[v] for v in mesh.cells[cell]):
        bad = [int(v) for v in mesh.cells[cell] if not ok[v]]
        raise MeshError(f"vertices {bad} fail the three-normal property")
    return _cell_dofs(mesh, cell, k, _vertex_hex_dofs)


def cell_dofs(mesh, cell, k, vertex_dofs="hex"):
    if mesh.kind == TET:
        return tet_dofs(cell, mesh, k)
    return hex_dofs(cell, mesh, k, vertex_dofs)


# ----------------------------------------------------------------------------
# Local element

def dof_data(dofs):
    """Stack DOF points ``(n, 3)`` and weight matrices ``(n, 3, 3)``."""
    points = np.array([d.point for d in dofs])
    weights = np.array([d.weights for d in dofs])
    return points, weights


def local_dof_matrix(basis, points, weights):
    """``M[i, 9*b + e] = l_i(phi_b E_e)``, with ``E_e`` the e-th matrix unit (row-major)."""
    phi = basis.eval(points)
    return (phi[:, :, None] * weights.reshape(-1, 1, 9)).reshape(len(points), -1)


@dataclass
class LocalElement:
    cell: int
    k: int
    basis: polyspace.PolyBasis
    dofs: list
    points: np.ndarray
    weights: np.ndarray
    nodal: np.ndarray = None
    condition: float = None
    residual: float = None

    @property
    def ndofs(self):
        return len(self.dofs)

    def coefficients(self, local_values):
        """Matrix-polynomial coefficients ``(dim, 3, 3)`` of ``sum_j values[j] * nodal_j``."""
        c = self.nodal @ np.asarray(local_values, dtype=float)
        return c.reshape(self.basis.dim, 3, 3)

    def evaluate(self, local_values, points):
        return polyspace.matrix_poly_eval(self.basis, self.coefficients(local_values), points)

    def curl(self, local_values, points):
        return polyspace.row_curl(self.basis, self.coefficients(local_values), points)

    def dof_values(self, field):
        """Apply every DOF functional to a vectorised matrix field ``field(points) -> (n, 3, 3)``."""
        U = np.asarray(field(self.points), dtype=float).reshape(-1, 3, 3)
        return np.einsum("nij,nij->n", self.weights, U)

    def apply_dofs(self, coeffs):
        """DOF values of a local matrix polynomial given by ``coeffs (dim, 3, 3)``."""
        U = polyspace.matrix_poly_eval(self.basis, coeffs, self.points)
        return np.einsum("nij,nij->n", self.weights, U)


def build_element(mesh, cell, k, vertex_dofs="hex", nodal=True):
    dofs = cell_dofs(mesh, cell, k, vertex_dofs)
    basis = polyspace.for_cell(mesh.kind, k, mesh.cell_vertices(cell))
    points, weights = dof_data(dofs)
    elem = LocalElement(cell, k, basis, dofs, points, weights)
    if nodal:
        nodal_basis(elem)
    return elem


def nodal_basis(elem):
    """Fill ``elem.nodal`` with the dual basis (column j is dual to DOF j)."""
    M = local_dof_matrix(elem.basis, elem.points, elem.weights)
    if M.shape[0] != M.shape[1]:
        raise ElementError(f"DOF matrix is {M.shape}, not square")
    try:
        N = np.linalg.inv(M)
    except np.linalg.LinAlgError:
        raise ElementError(f"cell {elem.cell}: DOF matrix is singular") from None
    cond = float(np.linalg.norm(M, 1) * np.linalg.norm(N, 1))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ElementError(f"cell {elem.cell}: DOF matrix condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e}")
    elem.nodal = N
    elem.condition = cond
    elem.residual = float(np.max(np.abs(M @ N - np.eye(len(M)))))
    return elem


# ----------------------------------------------------------------------------
# Kernel audits of the pointwise condition sets

CONDITION_SETS = ("face-5", "face-9", "edge-8", "edge-9", "vertex-8", "vertex-9", "hexvertex-8", "hexvertex-9")
EXPECTED_KERNEL_DIM = {
    "face-5": 4, "face-9": 0, "edge-8": 1, "edge-9": 0,
    "vertex-8": 1, "vertex-9": 0, "hexvertex-8": 1, "hexvertex-9": 0,
}


def null_space(A, rtol=KERNEL_RTOL):
    """Orthonormal null-space basis (columns); singular values below ``rtol * max`` count as zero."""
    A = np.atleast_2d(A)
    _, s, vt = np.linalg.svd(A)
    smax = s[0] if len(s) else 0.0
    rank = int(np.sum(s > rtol * smax)) if smax > 0 else 0
    return vt[rank:].T


def condition_weights(name, frames):
    """Weight matrices ``(m, 3, 3)`` of a named pointwise condition set.

    ``frames`` keys: face sets ``a1, a2, n``; edge sets ``t, ne1, ne2, nf1, nf2``;
    hex-vertex sets ``n1, n2, n3`` and ``edges`` (three ``(t, ne1, ne2)``).
    """
    family, count = name.split("-")
    count = int(count)
    if family == "face":
        terms = face_conformity_terms(frames["a1"], frames["a2"], frames["n"])
        if count == 9:
            terms += face_complement_terms(frames["a1"], frames["a2"], frames["n"])
        Gs = [weight_matrix(t) for t in terms]
    elif family == "edge":
        t = frames["t"]
        terms = edge_plane_terms(t, frames["ne1"], frames["ne2"])
        terms += edge_face_terms(t, frames["nf1"]) + edge_face_terms(t, frames["nf2"])
        if count == 9:
            terms += edge_identity_terms(t)
        Gs = [weight_matrix(t) for t in terms]
    elif family == "vertex":
        Gs = _vertex_full_weights()
        if count == 9:
            Gs.append(np.eye(3))
    elif family == "hexvertex":
        n1, n2, n3 = frames["n1"], frames["n2"], frames["n3"]
        terms = hex_joint_terms(n1, n2, n3)
        for t, ne1, ne2 in frames["edges"]:
            terms += edge_plane_terms(t, ne1, ne2)
        if count == 9:
            terms += hex_identity_terms(n1, n2, n3)
        Gs = [weight_matrix(t) for t in terms]
    else:
        raise ValueError(f"unknown condition set {name!r}")
    if len(Gs) != count:
        raise AssertionError(f"{name}: built {len(Gs)} conditions")
    return np.array(Gs)


def random_frames(name, rng):
    """Random admissible frame vectors for a condition set."""
    family = name.split("-")[0]

    def rand_unit():
        return tensor3.unit(rng.standard_normal(3))

    if family == "face":
        while True:
            a1, a2, n = rng.standard_normal(3), rng.standard_normal(3), rand_unit()
            if abs(np.linalg.det(np.stack([a1, a2, n]))) > 0.1 * np.linalg.norm(a1) * np.linalg.norm(a2):
                return {"a1": a1, "a2": a2, "n": n}
    if family == "edge":
        t = rand_unit()
        p, q = tensor3.orthonormal_complement(t)
        # a random rotation of the plane frame, and two non-coplanar face normals in that plane
        th = rng.uniform(0, 2 * np.pi)
        ne1, ne2 = np.cos(th) * p + np.sin(th) * q, -np.sin(th) * p + np.cos(th) * q
        while True:
            a, b = rng.uniform(0, 2 * np.pi, 2)
            nf1, nf2 = np.cos(a) * p + np.sin(a) * q, np.cos(b) * p + np.sin(b) * q
            if abs(np.sin(a - b)) > 0.1:
                return {"t": t, "ne1": ne1, "ne2": ne2, "nf1": nf1, "nf2": nf2}
    if family == "vertex":
        return {}
    if family == "hexvertex":
        while True:
            n1, n2, n3 = rand_unit(), rand_unit(), rand_unit()
            if abs(np.linalg.det(np.stack([n1, n2, n3]))) > 0.2:
                break
        edges = []
        # edge E_i lies in the two faces normal to the other two vectors
        for a, b in ((1, 2), (0, 2), (0, 1)):
            ns = (n1, n2, n3)
            t = tensor3.unit(_cross(ns[a], ns[b]))
            edges.append((t,) + tensor3.orthonormal_complement(t))
        return {"n1": n1, "n2": n2, "n3": n3, "edges": edges}
    raise ValueError(f"unknown condition set {name!r}")


def kernel_audit(name, frames=None, rng=None, rtol=KERNEL_RTOL):
    """Null-space basis (columns, row-major 3x3 flattening) of a named condition set."""
    if frames is None:
        frames = random_frames(name, rng if rng is not None else np.random.default_rng(0))
    G = condition_weights(name, frames)
    return null_space(G.reshape(len(G), 9), rtol)
