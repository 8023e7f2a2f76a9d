"""Global finite element space: DOF identification, enumeration, interpolation."""

from dataclasses import dataclass

import numpy as np

from symcurl import element as elem_mod
from symcurl.element import is_shared
from symcurl.mesh import MeshError
from symcurl.polyspace import HEX, TET


class GlobalSpace:
    """Piecewise ``P_k`` (tet) or ``Q_k`` (hex) matrix fields glued by shared DOFs.

    Local functionals with equal keys are identified with coefficient +1: every
    shared functional is built from global entity frames only, so its incarnations
    on different cells are the same linear map.  ``vertex_dofs`` selects the
    vertex functionals on hexahedral grids (``"hex"`` three-normal or ``"full"``).
    """

    def __init__(self, mesh, k, vertex_dofs="hex"):
        if mesh.kind == TET:
            vertex_dofs = "full"
        self.mesh = mesh
        self.k = k
        self.vertex_dofs = vertex_dofs
        self.elements = [elem_mod.build_element(mesh, c, k, vertex_dofs) for c in range(mesh.ncells)]
        keys = {}
        for el in self.elements:
            for j, d in enumerate(el.dofs):
                keys.setdefault(d.key, (el.cell, j))
        self.keys = sorted(keys)
        index = {key: i for i, key in enumerate(self.keys)}
        self.l2g = [np.array([index[d.key] for d in el.dofs], dtype=np.int64) for el in self.elements]
        # owner = lowest cell id holding the functional
        self.owner = [keys[key] for key in self.keys]

    @property
    def dim(self):
        return len(self.keys)

    def functional(self, g):
        c, j = self.owner[g]
        return self.elements[c].dofs[j]

    def zero(self):
        return FeFunction(self, np.zeros(self.dim))

    def shared_multiplicity(self):
        """Total number of local incarnations minus the number of global DOFs."""
        return sum(el.ndofs for el in self.elements) - self.dim


def build_space(mesh, k, vertex_dofs="hex"):
    return GlobalSpace(mesh, k, vertex_dofs)


@dataclass
class FeFunction:
    space: GlobalSpace
    coeffs: np.ndarray

    def local_values(self, cell):
        return self.coeffs[self.space.l2g[cell]]

    def cell_coefficients(self, cell):
        return self.space.elements[cell].coefficients(self.local_values(cell))

    def evaluate(self, cell, points, check=True):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if check and not np.all(contains(self.space.mesh, cell, points)):
            raise ValueError(f"point outside cell {cell}")
        return self.space.elements[cell].evaluate(self.local_values(cell), points)

    def curl(self, cell, points):
        return self.space.elements[cell].curl(self.local_values(cell), np.atleast_2d(points))

    def __mul__(self, s):
        return FeFunction(self.space, self.coeffs * s)

    __rmul__ = __mul__


def contains(mesh, cell, points, tol=1e-10):
    P = mesh.cell_vertices(cell)
    if mesh.kind == TET:
        J = (P[1:] - P[0]).T
        lam = np.linalg.solve(J, (points - P[0]).T).T
        bary = np.column_stack([1.0 - lam.sum(axis=1), lam])
        return np.all(bary >= -tol, axis=1)
    lo, hi = P[0], P[7]
    scale = np.max(hi - lo)
    return np.all((points >= lo - tol * scale) & (points <= hi + tol * scale), axis=1)


def evaluate(fe_function, cell, point):
    return fe_function.evaluate(cell, point)[0]


def interpolate(space, field):
    """``I_h field``: every global DOF takes the value of its functional on ``field``.

    ``field(points) -> (n, 3, 3)`` must be vectorised.  Shared DOFs are written once,
    by their owner (lowest cell id).
    """
    coeffs = np.empty(space.dim)
    written = np.zeros(space.dim, dtype=bool)
    for el, l2g in zip(space.elements, space.l2g):
        todo = ~written[l2g]
        if not np.any(todo):
            continue
        vals = el.dof_values(field)
        coeffs[l2g[todo]] = vals[todo]
        written[l2g[todo]] = True
    return FeFunction(space, coeffs)


def local_interpolant_values(space, field, cell):
    """DOF values of ``field`` as seen from one cell (no global gluing)."""
    return space.elements[cell].dof_values(field)


def identity_indicator(space, cell, tol=1e-12):
    """Function equal to the identity matrix on ``cell`` and zero elsewhere."""
    el = space.elements[cell]
    vals = el.dof_values(lambda x: np.broadcast_to(np.eye(3), (len(x), 3, 3)))
    for d, v in zip(el.dofs, vals):
        if is_shared(d.sharing_class) and abs(v) > tol:
            raise AssertionError(f"shared functional {d.key} does not vanish on the identity ({v:.3e})")
    coeffs = np.zeros(space.dim)
    private = np.array([not is_shared(d.sharing_class) for d in el.dofs])
    coeffs[space.l2g[cell][private]] = vals[private]
    return FeFunction(space, coeffs)


def interior_vertex_dof_count(space, vertex):
    """Number of distinct global DOFs owned by an interior ``vertex``."""
    if space.mesh.boundary_vertex[vertex]:
        raise MeshError(f"vertex {vertex} lies on the boundary")
    return sum(1 for key in space.keys if key[0] == 0 and key[1] == vertex)


# ----------------------------------------------------------------------------
# serialisation

def save_fef(fe_function):
    lines = [f"fef {fe_function.space.k} {fe_function.space.dim}"]
    lines += [repr(float(c)) for c in fe_function.coeffs]
    return "\n".join(lines) + "\n"


def load_fef(text, space):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    head = lines[0].split() if lines else []
    if len(head) != 3 or head[0] != "fef":
        raise ValueError("expected header 'fef <k> <dimension>'")
    k, dim = int(head[1]), int(head[2])
    if k != space.k or dim != space.dim:
        raise ValueError(f"file is for k={k}, dim={dim}; space has k={space.k}, dim={space.dim}")
    coeffs = np.array([float(x) for x in lines[1:]])
    if len(coeffs) != dim:
        raise ValueError(f"expected {dim} coefficients, found {len(coeffs)}")
    return FeFunction(space, coeffs)
