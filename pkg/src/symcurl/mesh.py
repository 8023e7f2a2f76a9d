"""Tetrahedral and axis-aligned hexahedral grids with globally fixed orientation frames."""

import itertools
from dataclasses import dataclass

import numpy as np

from symcurl import tensor3
from symcurl.polyspace import HEX, HEX_EDGES, HEX_FACES, TET, TET_EDGES, TET_FACES


class MeshError(ValueError):
    pass


class MeshFormatError(MeshError):
    """Malformed ``.m3`` header or record."""


class MeshIndexError(MeshError):
    """Cell references a vertex that does not exist."""


class NonConformingMeshError(MeshError):
    pass


class MixedCellKindError(MeshError):
    pass


class NonAxisAlignedError(MeshError):
    pass


class DegenerateCellError(MeshError):
    pass


NVERT = {TET: 4, HEX: 8}
LOCAL_EDGES = {TET: TET_EDGES, HEX: HEX_EDGES}
LOCAL_FACES = {TET: TET_FACES, HEX: HEX_FACES}


@dataclass
class CellGeometry:
    cell: int
    vertices: np.ndarray
    diameter: float
    inradius: float
    volume: float


def _unique_rows(rows):
    uniq, inverse, counts = np.unique(rows, axis=0, return_inverse=True, return_counts=True)
    return uniq, inverse.reshape(-1), counts


class OrientedMesh:
    """Conforming single-kind grid.

    Edges and faces are stored as sorted global vertex tuples.  Every edge and
    face (and, on hexahedral grids, every vertex) carries one
    :class:`~symcurl.tensor3.EntityFrame` that all incident cells share.
    """

    def __init__(self, kind, vertices, cells, check_axis_aligned=True):
        if kind not in NVERT:
            raise MeshFormatError(f"unknown cell kind {kind!r}")
        self.kind = kind
        self.vertices = np.array(vertices, dtype=float).reshape(-1, 3)
        cells = np.array(cells, dtype=np.int64)
        if cells.ndim != 2 or cells.shape[1] != NVERT[kind]:
            raise MixedCellKindError(f"{kind} cells need {NVERT[kind]} vertices")
        if cells.size and (cells.min() < 0 or cells.max() >= len(self.vertices)):
            raise MeshIndexError("cell vertex index out of range")
        self.cells = cells
        self.vertices.setflags(write=False)
        self.cells.setflags(write=False)
        self._check_cells(check_axis_aligned)
        self._derive_topology()
        self.derive_frames()

    # -- construction -----------------------------------------------------

    def _check_cells(self, check_axis_aligned):
        X = self.vertices[self.cells]
        if self.kind == TET:
            vol = np.einsum("ij,ij->i", X[:, 1] - X[:, 0], np.cross(X[:, 2] - X[:, 0], X[:, 3] - X[:, 0])) / 6.0
            h = np.max(np.linalg.norm(X[:, :, None] - X[:, None, :], axis=-1), axis=(1, 2))
            bad = np.abs(vol) <= 1e-12 * h ** 3
            if np.any(bad):
                raise DegenerateCellError(f"cell {int(np.argmax(bad))} has (near) zero volume")
            return
        for c, P in enumerate(X):
            ext = P[7] - P[0]
            if np.any(ext <= 0):
                if not check_axis_aligned:
                    continue
                raise NonAxisAlignedError(f"cell {c} is not a positively oriented axis-aligned box")
            expected = P[0] + np.array([[b & 1, b >> 1 & 1, b >> 2 & 1] for b in range(8)]) * ext
            if check_axis_aligned and not np.allclose(P, expected, rtol=0, atol=1e-12 * np.max(ext)):
                raise NonAxisAlignedError(f"cell {c} is not an axis-aligned box")

    def _derive_topology(self):
        nc = len(self.cells)
        le = np.array(LOCAL_EDGES[self.kind])
        lf = np.array(LOCAL_FACES[self.kind])
        all_edges = np.sort(self.cells[:, le], axis=-1).reshape(-1, 2)
        self.edges, inv, _ = _unique_rows(all_edges)
        self.cell_edges = inv.reshape(nc, len(le))
        all_faces = np.sort(self.cells[:, lf], axis=-1).reshape(-1, lf.shape[1])
        self.faces, inv, counts = _unique_rows(all_faces)
        self.cell_faces = inv.reshape(nc, len(lf))
        if np.any(counts > 2):
            raise NonConformingMeshError("a face is shared by more than two cells")
        self.face_cells = [[] for _ in range(len(self.faces))]
        for c in range(nc):
            for f in self.cell_faces[c]:
                self.face_cells[f].append(c)
        self.boundary_face = counts == 1
        self.edge_faces = [[] for _ in range(len(self.edges))]
        edge_index = {tuple(e): i for i, e in enumerate(self.edges)}
        self.face_edges = []
        for f, fv in enumerate(self.faces):
            ids = []
            for a, b in self._face_edge_pairs(fv):
                e = edge_index[(a, b)]
                ids.append(e)
                self.edge_faces[e].append(f)
            self.face_edges.append(ids)
        self.vertex_cells = [[] for _ in range(len(self.vertices))]
        for c, cv in enumerate(self.cells):
            for v in cv:
                self.vertex_cells[v].append(c)
        used = np.zeros(len(self.vertices), dtype=bool)
        used[self.cells.ravel()] = True
        bverts = np.unique(self.faces[self.boundary_face].ravel())
        self.boundary_vertex = np.zeros(len(self.vertices), dtype=bool)
        self.boundary_vertex[bverts] = True
        self.boundary_vertex[~used] = True

    def _face_edge_pairs(self, fv):
        if self.kind == TET:
            return [(fv[0], fv[1]), (fv[0], fv[2]), (fv[1], fv[2])]
        # quad: sorted vertices; the corner opposite fv[0] is the one farthest away
        P = self.vertices[list(fv)]
        far = int(np.argmax(np.linalg.norm(P - P[0], axis=1)))
        others = [i for i in range(1, 4) if i != far]
        cyc = [0, others[0], far, others[1]]
        return [tuple(sorted((fv[cyc[i]], fv[cyc[(i + 1) % 4]]))) for i in range(4)]

    def derive_frames(self):
        """Attach frames that depend only on global vertex numbering and coordinates."""
        X = self.vertices
        self.face_frames = tensor3.face_frames(X[self.faces[:, 0]], X[self.faces[:, 1]], X[self.faces[:, 2]])
        self.edge_frames = tensor3.edge_frames(X[self.edges[:, 0]], X[self.edges[:, 1]])
        if self.kind == HEX:
            self.vertex_frames = [tensor3.CANONICAL_VERTEX_FRAME] * len(X)
        else:
            self.vertex_frames = None
        # canonical parametrisation of quad faces: (origin, u-corner, w-corner)
        if self.kind == HEX:
            self.face_param = []
            for f, fv in enumerate(self.faces):
                o = fv[0]
                nbrs = sorted(b if a == o else a for a, b in (self.edges[e] for e in self.face_edges[f]) if o in (a, b))
                self.face_param.append((o, nbrs[0], nbrs[1]))
        return self

    # -- queries ------------------------------------------------------------

    @property
    def ncells(self):
        return len(self.cells)

    @property
    def nvertices(self):
        return len(self.vertices)

    def interior_faces(self):
        return np.flatnonzero(~self.boundary_face)

    def cell_vertices(self, c):
        return self.vertices[self.cells[c]]

    def geometry(self, c):
        P = self.cell_vertices(c)
        diam = float(np.max(np.linalg.norm(P[:, None] - P[None], axis=-1)))
        if self.kind == TET:
            vol = abs(np.dot(P[1] - P[0], np.cross(P[2] - P[0], P[3] - P[0]))) / 6.0
            area = sum(0.5 * np.linalg.norm(np.cross(P[b] - P[a], P[d] - P[a])) for a, b, d in TET_FACES)
            rho = 3.0 * vol / area
        else:
            ext = P[7] - P[0]
            vol = float(np.prod(np.abs(ext)))
            rho = 0.5 * float(np.min(np.abs(ext)))
        return CellGeometry(c, P, diam, float(rho), float(vol))

    def geometry_arrays(self):
        """Per-cell ``(diameter, inradius, volume)`` arrays."""
        X = self.vertices[self.cells]
        diam = np.max(np.linalg.norm(X[:, :, None] - X[:, None, :], axis=-1), axis=(1, 2))
        if self.kind == TET:
            vol = np.abs(np.einsum("ij,ij->i", X[:, 1] - X[:, 0],
                                   np.cross(X[:, 2] - X[:, 0], X[:, 3] - X[:, 0]))) / 6.0
            area = sum(0.5 * np.linalg.norm(np.cross(X[:, b] - X[:, a], X[:, d] - X[:, a]), axis=1)
                       for a, b, d in TET_FACES)
            rho = 3.0 * vol / area
        else:
            ext = np.abs(X[:, 7] - X[:, 0])
            vol = np.prod(ext, axis=1)
            rho = 0.5 * np.min(ext, axis=1)
        return diam, rho, vol

    def volume(self):
        return float(np.sum(self.geometry_arrays()[2]))

    def edge_points(self, e, k):
        """Interior lattice points of edge ``e``, ordered from its lower to its higher vertex."""
        a, b = self.edges[e]
        pa, pb = self.vertices[a], self.vertices[b]
        return [((k - i) * pa + i * pb) / k for i in range(1, k)]

    def face_points(self, f, k):
        """Interior lattice points of face ``f`` in a canonical, cell-independent order."""
        if self.kind == TET:
            from symcurl.polyspace import simplex_indices

            P = self.vertices[self.faces[f]]
            return [np.dot(alpha, P) / k for alpha in simplex_indices(3, k, interior=True)]
        o, u, w = (self.vertices[i] for i in self.face_param[f])
        return [o + (i / k) * (u - o) + (j / k) * (w - o) for j in range(1, k) for i in range(1, k)]

    def cell_points(self, c, k):
        """Interior lattice points of cell ``c``."""
        P = self.cell_vertices(c)
        if self.kind == TET:
            from symcurl.polyspace import simplex_indices

            return [np.dot(alpha, P) / k for alpha in simplex_indices(4, k, interior=True)]
        ext = P[7] - P[0]
        return [P[0] + np.array([i, j, l]) / k * ext
                for l in range(1, k) for j in range(1, k) for i in range(1, k)]

    @property
    def three_normal_flags(self):
        if getattr(self, "_three_normal", None) is None:
            self._three_normal = self.three_normal_check()
        return self._three_normal

    def three_normal_check(self, tol=1e-10):
        """Per vertex: is every face at the vertex normal to one of the vertex frame axes?"""
        if self.kind != HEX:
            raise MeshError("three-normal property only applies to hexahedral grids")
        ok = np.ones(self.nvertices, dtype=bool)
        for f, fv in enumerate(self.faces):
            # geometric normal of the actual quad (may differ from frame normal if warped)
            P = self.vertices[list(fv)]
            normals = [tensor3.unit(np.cross(P[b] - P[a], P[c] - P[a]))
                       for a, b, c in itertools.combinations(range(4), 3)]
            for v in fv:
                axes = self.vertex_frames[v].vectors
                for n in normals:
                    if not any(abs(abs(np.dot(n, ax)) - 1.0) <= tol for ax in axes):
                        ok[v] = False
                        break
        return ok


# ----------------------------------------------------------------------------
# Generators


def _grid_vertices(n):
    g = np.linspace(0.0, 1.0, n + 1)
    z, y, x = np.meshgrid(g, g, g, indexing="ij")
    return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)


def _cube_corners(n):
    idx = lambda i, j, l: i + (n + 1) * (j + (n + 1) * l)  # noqa: E731
    out = []
    for l, j, i in itertools.product(range(n), repeat=3):
        out.append([idx(i + (b & 1), j + (b >> 1 & 1), l + (b >> 2 & 1)) for b in range(8)])
    return np.array(out, dtype=np.int64)


def generate_unit_cube_hexes(n):
    if n < 1:
        raise ValueError("need at least one subdivision")
    return OrientedMesh(HEX, _grid_vertices(n), _cube_corners(n))


# Kuhn split of the unit cube along its main diagonal: one tet per axis permutation
_KUHN = []
for _perm in itertools.permutations(range(3)):
    _path = [0]
    for _ax in _perm:
        _path.append(_path[-1] | (1 << _ax))
    _KUHN.append(_path)


def generate_unit_cube_tets(n):
    if n < 1:
        raise ValueError("need at least one subdivision")
    corners = _cube_corners(n)
    cells = corners[:, np.array(_KUHN)].reshape(-1, 4)
    return OrientedMesh(TET, _grid_vertices(n), cells)


def generate(spec):
    """Build a mesh from ``cube-tet:N`` or ``cube-hex:N``."""
    try:
        name, n = spec.split(":")
        n = int(n)
    except ValueError:
        raise ValueError(f"bad generator spec {spec!r}") from None
    if name == "cube-tet":
        return generate_unit_cube_tets(n)
    if name == "cube-hex":
        return generate_unit_cube_hexes(n)
    raise ValueError(f"unknown generator {name!r}")


# ----------------------------------------------------------------------------
# Refinement


def refine_uniform(mesh):
    """Red refinement (tets) or midpoint subdivision (hexes); every cell gets 8 children."""
    X = mesh.vertices
    nv = len(X)
    mids = 0.5 * (X[mesh.edges[:, 0]] + X[mesh.edges[:, 1]])
    edge_id = {tuple(e): nv + i for i, e in enumerate(mesh.edges)}
    if mesh.kind == TET:
        verts = np.vstack([X, mids])
        cells = []
        for cv in mesh.cells:
            m = {}
            for a, b in itertools.combinations(range(4), 2):
                m[a, b] = m[b, a] = edge_id[tuple(sorted((cv[a], cv[b])))]
            for i in range(4):
                cells.append([cv[i]] + [m[i, j] for j in range(4) if j != i])
            cells.extend(_split_octahedron(verts, m))
        return OrientedMesh(TET, verts, cells)
    face_centres = X[mesh.faces].mean(axis=1)
    cell_centres = X[mesh.cells].mean(axis=1)
    nf = len(mesh.faces)
    verts = np.vstack([X, mids, face_centres, cell_centres])
    face_id = {tuple(f): nv + len(mesh.edges) + i for i, f in enumerate(mesh.faces)}
    cells = []
    for c, cv in enumerate(mesh.cells):
        # 3x3x3 lattice of child corners, indexed by (i, j, l) in {0, 1, 2}
        grid = {}
        for l, j, i in itertools.product(range(3), repeat=3):
            corners = sorted({cv[(ci >> 0 & 1) | (cj << 1) | (cl << 2)]
                              for ci in ((0, 1) if i == 1 else (i // 2,))
                              for cj in ((0, 1) if j == 1 else (j // 2,))
                              for cl in ((0, 1) if l == 1 else (l // 2,))})
            if len(corners) == 1:
                grid[i, j, l] = corners[0]
            elif len(corners) == 2:
                grid[i, j, l] = edge_id[tuple(corners)]
            elif len(corners) == 4:
                grid[i, j, l] = face_id[tuple(corners)]
            else:
                grid[i, j, l] = nv + len(mesh.edges) + nf + c
        for cl, cj, ci in itertools.product(range(2), repeat=3):
            cells.append([grid[ci + (b & 1), cj + (b >> 1 & 1), cl + (b >> 2 & 1)] for b in range(8)])
    return OrientedMesh(HEX, verts, cells)


def _split_octahedron(verts, m):
    """Four tets filling the inner octahedron of a red-refined tet."""
    diagonals = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]

    def key(diag):
        p, q = m[diag[0]], m[diag[1]]
        return (np.linalg.norm(verts[p] - verts[q]), min(p, q), max(p, q))

    lengths = [key(d) for d in diagonals]
    shortest = min(lengths, key=lambda t: t[0])[0]
    # lengths within round-off count as ties; those are broken by vertex index
    cands = [d for d, t in zip(diagonals, lengths) if t[0] <= shortest * (1 + 1e-12)]
    diag = min(cands, key=lambda d: key(d)[1:])
    e1, e2 = diag
    equator = [e for e in itertools.combinations(range(4), 2) if e not in diag]
    # cyclic order: consecutive equator edges share a tet vertex
    ring = [equator[0]]
    rest = equator[1:]
    while rest:
        nxt = next(e for e in rest if set(e) & set(ring[-1]))
        ring.append(nxt)
        rest.remove(nxt)
    tets = []
    for i in range(4):
        tets.append([m[e1], m[e2], m[ring[i]], m[ring[(i + 1) % 4]]])
    return tets


# ----------------------------------------------------------------------------
# .m3 text format


def save_mesh(mesh):
    lines = [f"m3 {mesh.kind} {mesh.nvertices} {mesh.ncells}"]
    lines += ["v " + " ".join(repr(float(x)) for x in p) for p in mesh.vertices]
    lines += ["c " + " ".join(str(int(i)) for i in cv) for cv in mesh.cells]
    return "\n".join(lines) + "\n"


def load_mesh(text):
    records = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            records.append(line.split())
    if not records or records[0][0] != "m3" or len(records[0]) != 4:
        raise MeshFormatError("expected header 'm3 <tet|hex> <#vertices> <#cells>'")
    _, kind, nv, nc = records[0]
    if kind not in NVERT:
        raise MeshFormatError(f"unknown cell kind {kind!r}")
    try:
        nv, nc = int(nv), int(nc)
    except ValueError:
        raise MeshFormatError("vertex and cell counts must be integers") from None
    body = records[1:]
    if len(body) != nv + nc:
        raise MeshFormatError(f"expected {nv} vertex and {nc} cell records, found {len(body)} records")
    verts, cells = [], []
    for rec in body[:nv]:
        if rec[0] != "v" or len(rec) != 4:
            raise MeshFormatError(f"bad vertex record {' '.join(rec)!r}")
        try:
            verts.append([float(x) for x in rec[1:]])
        except ValueError:
            raise MeshFormatError(f"bad vertex record {' '.join(rec)!r}") from None
    for rec in body[nv:]:
        if rec[0] != "c":
            raise MeshFormatError(f"bad cell record {' '.join(rec)!r}")
        if len(rec) - 1 != NVERT[kind]:
            if len(rec) - 1 in NVERT.values():
                raise MixedCellKindError(f"{kind} mesh contains a cell with {len(rec) - 1} vertices")
            raise MeshFormatError(f"bad cell record {' '.join(rec)!r}")
        try:
            cv = [int(i) for i in rec[1:]]
        except ValueError:
            raise MeshFormatError(f"bad cell record {' '.join(rec)!r}") from None
        if min(cv) < 0 or max(cv) >= nv:
            raise MeshIndexError(f"cell {len(cells)} references vertex outside 0..{nv - 1}")
        cells.append(cv)
    mesh = OrientedMesh(kind, np.array(verts).reshape(-1, 3), np.array(cells, dtype=np.int64).reshape(-1, NVERT[kind]))
    _check_no_hanging_vertices(mesh)
    return mesh


def _check_no_hanging_vertices(mesh, tol=1e-10):
    """Reject grids where a vertex lies on a boundary face it does not belong to."""
    X = mesh.vertices
    scale = np.max(np.ptp(X, axis=0)) if len(X) else 1.0
    for f in np.flatnonzero(mesh.boundary_face):
        fv = mesh.faces[f]
        P = X[fv]
        lo, hi = P.min(axis=0) - tol * scale, P.max(axis=0) + tol * scale
        cand = np.flatnonzero(np.all((X >= lo) & (X <= hi), axis=1))
        cand = np.setdiff1d(cand, fv)
        if not len(cand):
            continue
        n = mesh.face_frames[f].normal
        off_plane = np.abs((X[cand] - P[0]) @ n) > tol * scale
        cand = cand[~off_plane]
        for v in cand:
            if _in_polygon(X[v], P, n, mesh.kind, tol * scale):
                raise NonConformingMeshError(f"vertex {v} hangs on face {tuple(fv)}")


def _in_polygon(x, P, n, kind, tol):
    if kind == TET:
        tris = [P]
    else:
        o = P[0]
        far = int(np.argmax(np.linalg.norm(P - o, axis=1)))
        others = [i for i in range(1, 4) if i != far]
        tris = [P[[0, others[0], far]], P[[0, far, others[1]]]]
    for a, b, c in tris:
        area = np.dot(np.cross(b - a, c - a), n)
        l1 = np.dot(np.cross(c - b, x - b), n) / area
        l2 = np.dot(np.cross(a - c, x - c), n) / area
        l3 = 1.0 - l1 - l2
        if min(l1, l2, l3) >= -tol:
            return True
    return False
