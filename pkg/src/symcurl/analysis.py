"""Conformity defects, interpolation errors, convergence studies and the lemma suite."""

from dataclasses import dataclass, field

import numpy as np

from symcurl import element as elem_mod
from symcurl import mesh as mesh_mod
from symcurl import space as space_mod
from symcurl import tensor3
from symcurl.polyspace import HEX, TET, quadrature

SQRT2 = np.sqrt(2.0)


# ----------------------------------------------------------------------------
# fields

def trig_field():
    """``U_ij(x) = sin(pi (x1 + 2 x2 + 3 x3) + i + 2 j)`` (1-based i, j) and its row-wise curl."""
    c = np.array([1.0, 2.0, 3.0])
    shift = np.add.outer(np.arange(1, 4), 2 * np.arange(1, 4))

    def U(x):
        phase = np.pi * (np.atleast_2d(x) @ c)
        return np.sin(phase[:, None, None] + shift)

    def curl(x):
        phase = np.pi * (np.atleast_2d(x) @ c)
        G = np.pi * np.cos(phase[:, None, None] + shift)[..., None] * c
        from symcurl.polyspace import curl_rows
        return curl_rows(G)

    return U, curl


def polynomial_field(degree, seed=0):
    """Random global matrix polynomial of total degree ``degree`` and its row-wise curl."""
    from symcurl.polyspace import PolyBasis, curl_rows

    basis = PolyBasis(TET, degree)
    coeffs = np.random.default_rng(seed).uniform(-1.0, 1.0, (basis.dim, 3, 3))

    def U(x):
        return np.einsum("pb,bij->pij", basis.eval(x), coeffs)

    def curl(x):
        return curl_rows(np.einsum("pbl,bij->pijl", basis.grad(x), coeffs))

    return U, curl


def named_field(name):
    if name == "trig":
        return trig_field()
    if name.startswith("poly:"):
        return polynomial_field(int(name.split(":", 1)[1]))
    raise ValueError(f"unknown field {name!r}")


def random_function(space, rng):
    return space_mod.FeFunction(space, rng.uniform(-1.0, 1.0, space.dim))


# ----------------------------------------------------------------------------
# face defects

@dataclass
class DefectReport:
    faces: np.ndarray
    max_sym: np.ndarray
    int_sym: np.ndarray
    max_devsym: np.ndarray
    max_raw: np.ndarray
    scale: float = 1.0
    seed: int = None

    @property
    def sym(self):
        return float(self.max_sym.max(initial=0.0))

    @property
    def devsym(self):
        return float(self.max_devsym.max(initial=0.0))

    @property
    def raw(self):
        return float(self.max_raw.max(initial=0.0))

    @property
    def integrated(self):
        return float(self.int_sym.sum())

    def normalized(self):
        return {"sym": self.sym / self.scale, "devsym": self.devsym / self.scale, "raw": self.raw / self.scale}

    def as_dict(self):
        return {
            "seed": self.seed,
            "coeff_scale": self.scale,
            "max_sym_defect": self.sym,
            "max_devsym_defect": self.devsym,
            "max_raw_defect": self.raw,
            "integrated_sym_defect": self.integrated,
            "faces": [
                {"face": int(f), "max_sym": float(a), "int_sym": float(b), "max_devsym": float(c), "max_raw": float(d)}
                for f, a, b, c, d in zip(self.faces, self.max_sym, self.int_sym, self.max_devsym, self.max_raw)
            ],
        }


def face_quadrature_points(mesh, f, degree):
    if mesh.kind == TET:
        q = quadrature("tri", degree)
        return q.map_to(mesh.vertices[mesh.faces[f]])
    q = quadrature("quad", degree)
    o, u, w = mesh.face_param[f]
    return q.map_to(mesh.vertices[[o, u, w]])


def _sides(mesh, f):
    """Cells on either side of an interior face as ``(minus, plus)``; the normal points into ``plus``."""
    c0, c1 = mesh.face_cells[f]
    n = mesh.face_frames[f].normal
    x0 = mesh.vertices[mesh.faces[f][0]]
    if np.dot(mesh.cell_vertices(c1).mean(axis=0) - x0, n) > 0:
        return c0, c1
    return c1, c0


def face_defect(fe_function, degree=None, faces=None, swap=False):
    """Jump defects of ``fe_function`` on interior faces (Frobenius norms)."""
    space = fe_function.space
    mesh = space.mesh
    degree = degree or max(2 * space.k, 1)
    faces = mesh.interior_faces() if faces is None else np.asarray(faces)
    out = np.zeros((4, len(faces)))
    for i, f in enumerate(faces):
        pts, wts = face_quadrature_points(mesh, f, degree)
        minus, plus = _sides(mesh, f)
        if swap:
            minus, plus = plus, minus
        jump = fe_function.evaluate(plus, pts, check=False) - fe_function.evaluate(minus, pts, check=False)
        A = tensor3.anti(mesh.face_frames[f].normal)
        raw = jump @ A
        s = tensor3.sym(raw)
        ds = tensor3.dev(s)
        ns = np.linalg.norm(s, axis=(1, 2))
        out[:, i] = [ns.max(), np.dot(wts, ns ** 2), np.linalg.norm(ds, axis=(1, 2)).max(),
                     np.linalg.norm(raw, axis=(1, 2)).max()]
    scale = float(np.max(np.abs(fe_function.coeffs), initial=0.0)) or 1.0
    return DefectReport(np.asarray(faces), out[0], out[1], out[2], out[3], scale)


# ----------------------------------------------------------------------------
# errors

def cell_quadrature(mesh, c, degree):
    if mesh.kind == TET:
        return quadrature(TET, degree).map_to(mesh.cell_vertices(c))
    return quadrature(HEX, degree).map_to(mesh.cell_vertices(c))


def default_error_degree(k):
    return max(2 * k + 2, 6)


def l2_error(field, fe_function, degree=None):
    """``||field - u_h||_{L2}`` with the Frobenius norm pointwise."""
    space = fe_function.space
    degree = degree or default_error_degree(space.k)
    total = 0.0
    for c in range(space.mesh.ncells):
        pts, wts = cell_quadrature(space.mesh, c, degree)
        diff = np.asarray(field(pts)) - fe_function.evaluate(c, pts, check=False)
        total += np.dot(wts, np.sum(diff ** 2, axis=(1, 2)))
    return float(np.sqrt(total))


def symcurl_error(field_curl, fe_function, degree=None):
    """Broken ``||sym Curl(U - u_h)||_{L2}``; ``field_curl`` returns the row-wise curl of ``U``."""
    space = fe_function.space
    degree = degree or default_error_degree(space.k)
    total = 0.0
    for c in range(space.mesh.ncells):
        pts, wts = cell_quadrature(space.mesh, c, degree)
        diff = tensor3.sym(np.asarray(field_curl(pts)) - fe_function.curl(c, pts))
        total += np.dot(wts, np.sum(diff ** 2, axis=(1, 2)))
    return float(np.sqrt(total))


# ----------------------------------------------------------------------------
# convergence

@dataclass
class LevelResult:
    level: int
    ncells: int
    h: float
    shape: float
    l2_error: float
    symcurl_error: float
    l2_rate: float = None
    symcurl_rate: float = None


@dataclass
class ConvergenceReport:
    cell_kind: str
    k: int
    field: str
    levels: list = field(default_factory=list)

    def rates(self, which="l2"):
        return [getattr(r, f"{which}_rate") for r in self.levels[1:]]

    def to_csv(self):
        lines = ["level,h,l2_error,l2_rate,symcurl_error,symcurl_rate"]
        for r in self.levels:
            fmt = lambda v: "" if v is None else f"{v:.6e}"  # noqa: E731
            lines.append(f"{r.level},{r.h:.6e},{r.l2_error:.6e},{fmt(r.l2_rate)},"
                         f"{r.symcurl_error:.6e},{fmt(r.symcurl_rate)}")
        return "\n".join(lines) + "\n"


def convergence_study(field, field_curl, k, levels, cell_kind=TET, base=2, field_name="custom",
                      vertex_dofs="hex", log=None):
    """Interpolate on ``levels`` successively refined unit-cube grids and record errors and rates."""
    if levels < 2:
        raise ValueError("need at least two levels")
    mesh = mesh_mod.generate(f"cube-{cell_kind}:{base}")
    report = ConvergenceReport(cell_kind, k, field_name)
    for level in range(levels):
        if level:
            mesh = mesh_mod.refine_uniform(mesh)
        diam, rho, _ = mesh.geometry_arrays()
        space = space_mod.build_space(mesh, k, vertex_dofs)
        uh = space_mod.interpolate(space, field)
        row = LevelResult(level, mesh.ncells, float(diam.max()), float(np.max(diam / rho)),
                          l2_error(field, uh), symcurl_error(field_curl, uh))
        if report.levels:
            prev = report.levels[-1]
            dh = np.log(prev.h / row.h)
            row.l2_rate = float(np.log(prev.l2_error / row.l2_error) / dh)
            row.symcurl_rate = float(np.log(prev.symcurl_error / row.symcurl_error) / dh)
        report.levels.append(row)
        if log:
            log(row)
    return report


# ----------------------------------------------------------------------------
# pointwise algebra checks

def linear_map_matrix(f):
    """9x9 matrix of a linear map on 3x3 matrices (row-major flattening)."""
    cols = []
    for e in range(9):
        E = np.zeros(9)
        E[e] = 1.0
        cols.append(np.asarray(f(E.reshape(3, 3))).ravel())
    return np.array(cols).T


def sym_devsym_kernels(n, rtol=elem_mod.KERNEL_RTOL):
    """Kernels of ``U -> sym(U anti n)`` and ``U -> dev sym(U anti n)`` and their mutual residual."""
    A = tensor3.anti(n)
    K1 = elem_mod.null_space(linear_map_matrix(lambda U: tensor3.sym(U @ A)), rtol)
    K2 = elem_mod.null_space(linear_map_matrix(lambda U: tensor3.dev(tensor3.sym(U @ A))), rtol)
    residual = max(np.linalg.norm(K1 - K2 @ (K2.T @ K1)), np.linalg.norm(K2 - K1 @ (K1.T @ K2)))
    return K1, K2, float(residual)


def identity_in_kernel(K):
    I = np.eye(3).ravel() / np.sqrt(3.0)
    return float(np.linalg.norm(I - K @ (K.T @ I)))


@dataclass
class LemmaRow:
    name: str
    expected: int
    dims: list
    identity_residual: float = None

    @property
    def passed(self):
        ok = all(d == self.expected for d in self.dims)
        if self.identity_residual is not None:
            ok = ok and self.identity_residual < 1e-10
        return ok


def lemma_suite(seed=0, draws=50):
    """Kernel dimensions of every pointwise condition set over random frames."""
    rng = np.random.default_rng(seed)
    rows = []
    for name in elem_mod.CONDITION_SETS:
        dims, ires = [], 0.0
        for _ in range(draws):
            K = elem_mod.kernel_audit(name, rng=rng)
            dims.append(K.shape[1])
            if elem_mod.EXPECTED_KERNEL_DIM[name] == 1 or name == "face-5":
                ires = max(ires, identity_in_kernel(K) if K.shape[1] else np.inf)
        expects_identity = elem_mod.EXPECTED_KERNEL_DIM[name] > 0
        rows.append(LemmaRow(name, elem_mod.EXPECTED_KERNEL_DIM[name], dims, ires if expects_identity else None))
    return rows


# ----------------------------------------------------------------------------
# unisolvence sampling

def random_tet(rng, min_quality=0.05):
    """Random tetrahedron in the unit cube with ``rho / h`` above ``min_quality``."""
    while True:
        P = rng.uniform(0.0, 1.0, (4, 3))
        vol = abs(np.dot(P[1] - P[0], np.cross(P[2] - P[0], P[3] - P[0]))) / 6.0
        area = sum(0.5 * np.linalg.norm(np.cross(P[b] - P[a], P[c] - P[a]))
                   for a, b, c in ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)))
        h = np.max(np.linalg.norm(P[:, None] - P[None], axis=-1))
        if 3 * vol / area / h > min_quality:
            return P


def random_box(rng):
    lo = rng.uniform(-1.0, 1.0, 3)
    return lo, lo + rng.uniform(0.2, 2.0, 3)


def unisolvence_sample(cell_kind, k, samples, seed=0, vertex_dofs="hex"):
    """Build ``samples`` random single-cell elements; returns ``(conditions, residuals)``."""
    rng = np.random.default_rng(seed)
    conds, res = [], []
    for _ in range(samples):
        if cell_kind == TET:
            m = mesh_mod.OrientedMesh(TET, random_tet(rng), [[0, 1, 2, 3]])
        else:
            lo, hi = random_box(rng)
            corners = [[(hi if b >> d & 1 else lo)[d] for d in range(3)] for b in range(8)]
            m = mesh_mod.OrientedMesh(HEX, corners, [list(range(8))])
        el = elem_mod.build_element(m, 0, k, vertex_dofs)
        conds.append(el.condition)
        res.append(el.residual)
    return np.array(conds), np.array(res)
