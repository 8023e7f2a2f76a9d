"""Small 3x3 tensor algebra and orientation frames."""

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12

IDENTITY = np.eye(3)


def anti(a):
    """Skew matrix with ``anti(a) @ b == cross(a, b)``."""
    a = np.asarray(a, dtype=float)
    return np.array([
        [0.0, -a[2], a[1]],
        [a[2], 0.0, -a[0]],
        [-a[1], a[0], 0.0],
    ])


def sym(A):
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def trace(A):
    return np.trace(np.asarray(A, dtype=float), axis1=-2, axis2=-1)


def dev(A):
    A = np.asarray(A, dtype=float)
    return A - trace(A)[..., None, None] / 3.0 * IDENTITY


def conformity_defect(U, n):
    """``sym(U anti(n))``; vanishes iff a jump ``U`` is admissible across a face with normal ``n``.

    ``U`` may carry leading batch dimensions.
    """
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
        raise ValueError("normal must be a unit vector")
    return sym(np.asarray(U, dtype=float) @ anti(n))


def curl_jump(U, n):
    """Raw tangential jump ``U anti(n)`` (zero iff row-wise H(curl) conforming)."""
    return np.asarray(U, dtype=float) @ anti(n)


def unit(v):
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / nrm


def orthonormal_complement(t):
    """Deterministic pair ``(n1, n2)`` completing the unit vector ``t`` to a right-handed frame.

    ``n1`` is the projection of the canonical axis least aligned with ``t``
    (lowest index on ties); ``n2 = t x n1``.
    """
    t = np.asarray(t, dtype=float)
    if abs(np.linalg.norm(t) - 1.0) > UNIT_TOL:
        raise ValueError("tangent must be a unit vector")
    j = int(np.argmin(np.abs(t)))  # argmin returns the first index on ties
    e = np.zeros(3)
    e[j] = 1.0
    n1 = unit(e - t[j] * t)
    n2 = np.cross(t, n1)
    return n1, n2


@dataclass(frozen=True, eq=False)
class EntityFrame:
    """Orientation vectors attached to one global mesh entity.

    face:   ``vectors = (n, a1, a2)``
    edge:   ``vectors = (t, n1, n2)``
    vertex: ``vectors = (n1, n2, n3)`` (hexahedral grids only)
    """

    kind: str
    vectors: tuple

    @property
    def normal(self):
        assert self.kind == "face"
        return self.vectors[0]

    @property
    def tangent(self):
        assert self.kind == "edge"
        return self.vectors[0]


def _unit_rows(V):
    return V / np.linalg.norm(V, axis=1)[:, None]


def face_frames(pa, pb, pc):
    """Batched :func:`face_frame` over rows of point arrays."""
    ab, ac = pb - pa, pc - pa
    cross = np.cross(ab, ac)
    size = np.maximum(np.linalg.norm(ab, axis=1), np.linalg.norm(ac, axis=1)) ** 2
    if np.any(np.linalg.norm(cross, axis=1) <= 1e-14 * size):
        raise ValueError("degenerate (collinear) face")
    n, a1, a2 = _unit_rows(cross), _unit_rows(ab), _unit_rows(ac)
    return [EntityFrame("face", (n[i], a1[i], a2[i])) for i in range(len(n))]


def edge_frames(p_low, p_high):
    """Batched :func:`edge_frame`."""
    t = _unit_rows(p_high - p_low)
    j = np.argmin(np.abs(t), axis=1)
    e = np.eye(3)[j]
    n1 = _unit_rows(e - t[np.arange(len(t)), j][:, None] * t)
    n2 = np.cross(t, n1)
    return [EntityFrame("edge", (t[i], n1[i], n2[i])) for i in range(len(t))]


def face_frame(pa, pb, pc):
    """Frame of a face from three of its points, taken in global vertex order."""
    pa, pb, pc = (np.asarray(p, dtype=float) for p in (pa, pb, pc))
    cross = np.cross(pb - pa, pc - pa)
    if np.linalg.norm(cross) <= 1e-14 * max(np.linalg.norm(pb - pa), np.linalg.norm(pc - pa)) ** 2:
        raise ValueError("degenerate (collinear) face")
    return EntityFrame("face", (unit(cross), unit(pb - pa), unit(pc - pa)))


def edge_frame(p_low, p_high):
    t = unit(np.asarray(p_high, dtype=float) - np.asarray(p_low, dtype=float))
    n1, n2 = orthonormal_complement(t)
    return EntityFrame("edge", (t, n1, n2))


CANONICAL_VERTEX_FRAME = EntityFrame("vertex", (IDENTITY[0].copy(), IDENTITY[1].copy(), IDENTITY[2].copy()))
