"""Acceptance criteria, one test each, at their stated tolerances.

Each test records a ``criterion N: PASS|FAIL ...`` line; the lines are printed
in the pytest terminal summary (and immediately with ``-s``).
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from symcurl import analysis, cli, mesh as mesh_mod, space as space_mod, tensor3


def _report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_1_dof_counts(capsys):
    expected = {("tet", 1): 36, ("tet", 2): 90, ("tet", 3): 180, ("tet", 4): 315,
                ("hex", 1): 72, ("hex", 2): 243, ("hex", 3): 576, ("hex", 4): 1125}
    found = {}
    t0 = time.perf_counter()
    for (cell, k) in expected:
        code = cli.main(["info", "--cell", cell, "--k", str(k)])
        out = capsys.readouterr().out
        total = [ln for ln in out.splitlines() if ln.startswith("total ")]
        found[cell, k] = (code, int(total[0].split()[1]) if total else None)
    elapsed = time.perf_counter() - t0
    ok = all(found[key] == (0, n) for key, n in expected.items()) and elapsed < 1.0
    counts = "/".join(str(found[key][1]) for key in expected)
    assert _report(1, ok, f"DOF counts {counts} in {elapsed:.2f}s (limit 1s)")


def test_criterion_2_lemma_suite():
    t0 = time.perf_counter()
    rows = analysis.lemma_suite(seed=0, draws=50)
    elapsed = time.perf_counter() - t0
    summary = ", ".join(f"{r.name}->{sorted(set(r.dims))}" for r in rows)
    ok = len(rows) == 8 and all(r.passed for r in rows)
    assert _report(2, ok, f"{summary} ({elapsed:.1f}s)")


def test_criterion_3_sym_devsym_kernels():
    rng = np.random.default_rng(2024)
    dims, worst = set(), 0.0
    for _ in range(1000):
        n = tensor3.unit(rng.normal(size=3))
        K1, K2, res = analysis.sym_devsym_kernels(n)
        dims.update((K1.shape[1], K2.shape[1]))
        worst = max(worst, res)
    ok = dims == {4} and worst < 1e-10
    assert _report(3, ok, f"1000 normals: kernel dims {sorted(dims)}, max projection residual {worst:.2e}")


def test_criterion_4_unisolvence():
    worst = {}
    for k in (1, 2, 3):
        _, res = analysis.unisolvence_sample("tet", k, 100, seed=k)
        worst[k] = float(res.max())
    ok = all(v < 1e-8 for v in worst.values())
    detail = ", ".join(f"k={k}: {v:.1e}" for k, v in worst.items())
    assert _report(4, ok, f"100 random tets per k, max biorthogonality residual {detail}")


def test_criterion_5_global_conformity():
    t0 = time.perf_counter()
    worst = {}
    for spec, ncells in (("cube-tet:2", 48), ("cube-hex:2", 8)):
        m = mesh_mod.generate(spec)
        assert m.ncells == ncells
        for k in (1, 2):
            sp = space_mod.build_space(m, k)
            s = d = 0.0
            for seed in range(20):
                norm = analysis.face_defect(analysis.random_function(sp, np.random.default_rng(seed))).normalized()
                s, d = max(s, norm["sym"]), max(d, norm["devsym"])
            worst[spec, k] = (s, d)
    elapsed = time.perf_counter() - t0
    ok = all(s < 1e-10 and d < 1e-10 for s, d in worst.values()) and elapsed < 60
    detail = ", ".join(f"{spec} k={k}: {s:.1e}/{d:.1e}" for (spec, k), (s, d) in worst.items())
    assert _report(5, ok, f"max normalized sym/dev-sym defect {detail} ({elapsed:.1f}s)")


@pytest.mark.parametrize("spec", ["cube-tet:1", "cube-hex:2"])
def test_criterion_6_nonconformity_witness(spec):
    m = mesh_mod.generate(spec)
    worst_raw, worst_sym = 0.0, 0.0
    for k in (1, 2):
        sp = space_mod.build_space(m, k)
        for cell in (0, m.ncells - 1):
            faces = [f for f in m.cell_faces[cell] if not m.boundary_face[f]]
            rep = analysis.face_defect(space_mod.identity_indicator(sp, cell), faces=faces)
            worst_raw = max(worst_raw, float(np.abs(rep.max_raw - np.sqrt(2.0)).max()))
            worst_sym = max(worst_sym, rep.sym)
    ok = worst_raw < 1e-12 and worst_sym < 1e-12
    assert _report(6, ok, f"{spec}: max |raw - sqrt2| {worst_raw:.1e}, max sym defect {worst_sym:.1e}")


def test_criterion_7_hex_vertex_counting(cube_hex2):
    v = int(np.flatnonzero(~cube_hex2.boundary_vertex)[0])
    hexcount = space_mod.interior_vertex_dof_count(space_mod.build_space(cube_hex2, 1, "hex"), v)
    full = space_mod.interior_vertex_dof_count(space_mod.build_space(cube_hex2, 1, "full"), v)
    assert _report(7, (hexcount, full) == (22, 16), f"interior vertex carries {hexcount} (hex) vs {full} (full)")


def test_criterion_8_polynomial_reproduction():
    worst = 0.0
    for spec in ("cube-tet:2", "cube-hex:2"):
        m = mesh_mod.generate(spec)
        for k in (1, 2, 3):
            sp = space_mod.build_space(m, k)
            for degree in range(k + 1):
                U, _ = analysis.polynomial_field(degree, seed=10 * k + degree)
                worst = max(worst, analysis.l2_error(U, space_mod.interpolate(sp, U)))
    assert _report(8, worst < 1e-9, f"max L2 error of reproduced degree<=k fields {worst:.1e}")


CONVERGENCE_CASES = [("tet", 1), ("tet", 2), ("hex", 1), ("hex", 2)]


@pytest.mark.slow
@pytest.mark.parametrize("cell,k", CONVERGENCE_CASES)
def test_criterion_9_convergence(cell, k):
    U, curl = analysis.trig_field()
    rep = analysis.convergence_study(U, curl, k, 3, cell, base=4, field_name="trig")
    l2 = rep.rates("l2")
    sc = rep.rates("symcurl")
    # rates over the finest pair of levels
    ok = abs(l2[-1] - (k + 1)) <= 0.2
    detail = f"{cell} k={k}: L2 rates {', '.join(f'{r:.3f}' for r in l2)} (target {k + 1}±0.2)"
    if k == 1:
        ok = ok and abs(sc[-1] - k) <= 0.3
        detail += f"; sym-Curl rates {', '.join(f'{r:.3f}' for r in sc)} (target {k}±0.3)"
    assert _report(9, ok, detail)
