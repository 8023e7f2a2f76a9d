import numpy as np
import pytest

from symcurl import analysis, element, mesh as mesh_mod, space as space_mod


def test_two_tet_dimension(two_tets):
    sp = space_mod.build_space(two_tets, 1)
    # 72 local DOFs; shared: 3 vertices x 8 + 3 edges x 0 (k=1) + 1 face x 0 (k=1)
    assert sp.dim == 72 - 24
    assert sp.shared_multiplicity() == 24


@pytest.mark.parametrize("spec,k", [("cube-tet:2", 1), ("cube-hex:2", 2)])
def test_identification_is_sound(spec, k):
    """Every incarnation of a global DOF is the same point functional."""
    m = mesh_mod.generate(spec)
    sp = space_mod.build_space(m, k)
    ref = {}
    for el, l2g in zip(sp.elements, sp.l2g):
        for d, g in zip(el.dofs, l2g):
            if g in ref:
                p, w = ref[g]
                np.testing.assert_allclose(d.point, p, atol=1e-15)
                np.testing.assert_allclose(d.weights, w, atol=1e-15)
            else:
                ref[g] = (d.point, d.weights)
    assert len(ref) == sp.dim


@pytest.mark.parametrize("kind", ["tet", "hex"])
def test_interpolation_is_a_projection(kind):
    m = mesh_mod.generate(f"cube-{kind}:1")
    sp = space_mod.build_space(m, 1)
    U, _ = analysis.trig_field()
    uh = space_mod.interpolate(sp, U)

    def as_field(x):
        out = np.empty((len(x), 3, 3))
        for c in range(m.ncells):
            inside = space_mod.contains(m, c, x)
            if inside.any():
                out[inside] = uh.evaluate(c, x[inside], check=False)
        return out

    # evaluate I_h U from the owner cell of each DOF, where it is single-valued
    vals = np.array([sp.functional(g)(as_field(sp.functional(g).point[None])[0]) for g in range(sp.dim)])
    np.testing.assert_allclose(vals, uh.coeffs, atol=1e-10)


@pytest.mark.parametrize("spec,k", [("cube-tet:2", 2), ("cube-hex:2", 1)])
def test_polynomial_reproduction(spec, k):
    m = mesh_mod.generate(spec)
    sp = space_mod.build_space(m, k)
    U, _ = analysis.polynomial_field(k, seed=3)
    uh = space_mod.interpolate(sp, U)
    assert analysis.l2_error(U, uh) < 1e-9


def test_identity_indicator(two_tets):
    sp = space_mod.build_space(two_tets, 2)
    ind = space_mod.identity_indicator(sp, 0)
    x = two_tets.cell_vertices(0).mean(axis=0)
    np.testing.assert_allclose(ind.evaluate(0, x)[0], np.eye(3), atol=1e-12)
    np.testing.assert_allclose(ind.evaluate(1, two_tets.cell_vertices(1).mean(axis=0))[0], 0, atol=1e-12)


def test_hex_vertex_dof_counts(cube_hex2):
    v = int(np.flatnonzero(~cube_hex2.boundary_vertex)[0])
    assert space_mod.interior_vertex_dof_count(space_mod.build_space(cube_hex2, 1, "hex"), v) == 22
    assert space_mod.interior_vertex_dof_count(space_mod.build_space(cube_hex2, 1, "full"), v) == 16
    with pytest.raises(mesh_mod.MeshError):
        space_mod.interior_vertex_dof_count(space_mod.build_space(cube_hex2, 1), 0)


def test_evaluate_outside_cell_raises(two_tets):
    sp = space_mod.build_space(two_tets, 1)
    with pytest.raises(ValueError):
        sp.zero().evaluate(0, [[1.0, 1.0, 1.0]])


def test_fef_round_trip(two_tets, rng):
    sp = space_mod.build_space(two_tets, 1)
    uh = analysis.random_function(sp, rng)
    back = space_mod.load_fef(space_mod.save_fef(uh), sp)
    np.testing.assert_array_equal(back.coeffs, uh.coeffs)
    with pytest.raises(ValueError):
        space_mod.load_fef("fef 2 48\n", sp)
    with pytest.raises(ValueError):
        space_mod.load_fef("junk\n", sp)
    with pytest.raises(ValueError):
        space_mod.load_fef("fef 1 48\n1.0\n", sp)


def test_scaling_is_linear(two_tets, rng):
    sp = space_mod.build_space(two_tets, 1)
    uh = analysis.random_function(sp, rng)
    x = two_tets.cell_vertices(1).mean(axis=0)
    np.testing.assert_allclose((2.5 * uh).evaluate(1, x), 2.5 * uh.evaluate(1, x))


def test_monte_carlo_l2_error(cube_hex2):
    """Quadrature L2 error agrees with a Monte-Carlo estimate to within 1%."""
    sp = space_mod.build_space(cube_hex2, 1)
    U, _ = analysis.trig_field()
    uh = space_mod.interpolate(sp, U)
    exact = analysis.l2_error(U, uh)
    rng = np.random.default_rng(7)
    x = rng.uniform(0, 1, (400_000, 3))
    cell = np.minimum((x * 2).astype(int), 1)
    cid = cell[:, 0] + 2 * cell[:, 1] + 4 * cell[:, 2]
    sq = np.empty(len(x))
    for c in range(8):
        sel = cid == c
        assert space_mod.contains(cube_hex2, c, x[sel][:5]).all()
        sq[sel] = np.sum((U(x[sel]) - uh.evaluate(c, x[sel], check=False)) ** 2, axis=(1, 2))
    assert np.sqrt(sq.mean()) == pytest.approx(exact, rel=0.01)


def test_condition_limit_enforced(ref_tet, monkeypatch):
    monkeypatch.setattr(element, "COND_LIMIT", 1.0)
    with pytest.raises(element.ElementError):
        element.build_element(ref_tet, 0, 1)
