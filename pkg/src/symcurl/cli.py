"""``elem`` command line interface."""

import argparse
import collections
import csv
import io
import json
import sys

import numpy as np

from symcurl import analysis, element, mesh as mesh_mod, polyspace, space as space_mod

CONFORMITY_TOL = 1e-10
WITNESS_TOL = 1e-12
UNISOLVENCE_TOL = 1e-8
REPRODUCTION_TOL = 1e-9
L2_RATE_TOL = 0.2
SYMCURL_RATE_TOL = 0.3


def _reference_mesh(cell_kind):
    if cell_kind == polyspace.TET:
        return mesh_mod.OrientedMesh(polyspace.TET, polyspace.REF_TET_VERTICES, [[0, 1, 2, 3]])
    return mesh_mod.OrientedMesh(polyspace.HEX, polyspace.REF_HEX_VERTICES, [list(range(8))])


def _load(args):
    if getattr(args, "mesh", None):
        with open(args.mesh) as fh:
            return mesh_mod.load_mesh(fh.read())
    return mesh_mod.generate(args.gen)


def cmd_info(args):
    m = _reference_mesh(args.cell)
    dofs = element.cell_dofs(m, 0, args.k, args.vertex_dofs)
    counts = collections.Counter((d.owner[0], d.sharing_class) for d in dofs)
    print(f"{'entity':<8} {'class':<30} {'count':>6}")
    for (kind, cls), n in sorted(counts.items(), key=lambda kv: (element._KIND_RANK[kv[0][0]], kv[0][1])):
        print(f"{kind:<8} {cls:<30} {n:>6}")
    expected = 9 * polyspace.scalar_dimension(args.cell, args.k)
    print(f"total {len(dofs)}")
    print(f"polynomial space dimension {expected}")
    return len(dofs) == expected


def cmd_unisolvence(args):
    conds, res = analysis.unisolvence_sample(args.cell, args.k, args.samples, args.seed, args.vertex_dofs)
    ok = bool(np.all(res < UNISOLVENCE_TOL))
    print(f"cell={args.cell} k={args.k} samples={args.samples} seed={args.seed}")
    print(f"condition (1-norm) min={conds.min():.3e} median={np.median(conds):.3e} max={conds.max():.3e}")
    print(f"biorthogonality residual max={res.max():.3e} (threshold {UNISOLVENCE_TOL:.0e})")
    print("PASS" if ok else "FAIL")
    return ok


def cmd_lemmas(args):
    rows = analysis.lemma_suite(args.seed, args.draws)
    print(f"{'condition set':<14} {'expected':>8} {'observed':>10} {'identity residual':>18}  result")
    for r in rows:
        obs = ",".join(str(d) for d in sorted(set(r.dims)))
        ires = "" if r.identity_residual is None else f"{r.identity_residual:.2e}"
        print(f"{r.name:<14} {r.expected:>8} {obs:>10} {ires:>18}  {'PASS' if r.passed else 'FAIL'}")
    return all(r.passed for r in rows)


def cmd_conformity(args):
    m = _load(args)
    sp = space_mod.build_space(m, args.k, args.vertex_dofs)
    rows = []
    for s in range(args.samples):
        seed = args.seed + s
        uh = analysis.random_function(sp, np.random.default_rng(seed))
        rep = analysis.face_defect(uh)
        rep.seed = seed
        norm = rep.normalized()
        rows.append((rep, norm, norm["sym"] < CONFORMITY_TOL and norm["devsym"] < CONFORMITY_TOL))
    ok = all(r[2] for r in rows)
    if args.format == "json":
        out = {
            "mesh": args.mesh or args.gen, "k": args.k, "dimension": sp.dim,
            "interior_faces": int(len(m.interior_faces())), "threshold": CONFORMITY_TOL, "pass": ok,
            "samples": [dict(rep.as_dict() if args.faces else {k: v for k, v in rep.as_dict().items() if k != "faces"},
                             normalized_sym=n["sym"], normalized_devsym=n["devsym"], passed=p)
                        for rep, n, p in rows],
        }
        print(json.dumps(out, indent=2))
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed", "max_sym", "max_devsym", "max_raw", "normalized_sym", "normalized_devsym", "pass"])
        for rep, n, p in rows:
            w.writerow([rep.seed, f"{rep.sym:.3e}", f"{rep.devsym:.3e}", f"{rep.raw:.3e}",
                        f"{n['sym']:.3e}", f"{n['devsym']:.3e}", int(p)])
        sys.stdout.write(buf.getvalue())
    return ok


def cmd_nonconformity(args):
    m = _load(args)
    if m.ncells < 2:
        print("witness needs a grid with at least two cells", file=sys.stderr)
        return False
    sp = space_mod.build_space(m, args.k, args.vertex_dofs)
    uh = space_mod.identity_indicator(sp, args.cell_id)
    faces = [f for f in m.cell_faces[args.cell_id] if not m.boundary_face[f]]
    rep = analysis.face_defect(uh, faces=faces)
    ok = bool(np.all(np.abs(rep.max_raw - analysis.SQRT2) < WITNESS_TOL) and rep.sym < WITNESS_TOL)
    print(f"indicator cell {args.cell_id}: {len(faces)} interior faces")
    print(f"{'face':>6} {'raw |[U] Anti n|':>18} {'sym defect':>12}")
    for f, raw, s in zip(rep.faces, rep.max_raw, rep.max_sym):
        print(f"{int(f):>6} {raw:>18.15f} {s:>12.3e}")
    print("PASS" if ok else "FAIL")
    return ok


def cmd_converge(args):
    U, curl = analysis.named_field(args.field)
    report = analysis.convergence_study(U, curl, args.k, args.levels, args.cell, args.base, args.field,
                                        args.vertex_dofs)
    sys.stdout.write(report.to_csv())
    last = report.levels[-1]
    if args.field.startswith("poly:") and int(args.field.split(":")[1]) <= args.k:
        ok = all(r.l2_error < REPRODUCTION_TOL for r in report.levels)
    else:
        ok = (abs(last.l2_rate - (args.k + 1)) <= L2_RATE_TOL
              and (args.k != 1 or abs(last.symcurl_rate - args.k) <= SYMCURL_RATE_TOL))
    print(f"# {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return ok


def cmd_interpolate(args):
    m = _load(args)
    sp = space_mod.build_space(m, args.k, args.vertex_dofs)
    U, _ = analysis.named_field(args.field)
    uh = space_mod.interpolate(sp, U)
    with open(args.out, "w") as fh:
        fh.write(space_mod.save_fef(uh))
    print(f"wrote {sp.dim} coefficients to {args.out}")
    return True


def cmd_mesh(args):
    m = mesh_mod.generate(args.gen)
    for _ in range(args.refine):
        m = mesh_mod.refine_uniform(m)
    with open(args.out, "w") as fh:
        fh.write(mesh_mod.save_mesh(m))
    print(f"wrote {m.ncells} {m.kind} cells to {args.out}")
    return True


def build_parser():
    p = argparse.ArgumentParser(prog="elem", description="H(sym Curl) finite element checks")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, cell=True):
        if cell:
            sp.add_argument("--cell", choices=[polyspace.TET, polyspace.HEX], default=polyspace.TET)
        sp.add_argument("--k", type=int, default=1)
        sp.add_argument("--vertex-dofs", choices=["hex", "full"], default="hex",
                        help="vertex functionals on hexahedra (ignored for tets)")

    def source(sp, required=True):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--mesh", help=".m3 mesh file")
        g.add_argument("--gen", help="generator, cube-tet:N or cube-hex:N")

    s = sub.add_parser("info", help="DOF table of one element")
    common(s)
    s.set_defaults(func=cmd_info)

    s = sub.add_parser("unisolvence", help="nodal basis on random cells")
    common(s)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_unisolvence)

    s = sub.add_parser("lemmas", help="kernel dimensions of the pointwise condition sets")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--draws", type=int, default=50)
    s.set_defaults(func=cmd_lemmas)

    s = sub.add_parser("conformity", help="face defects of random finite element functions")
    common(s, cell=False)
    source(s)
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.add_argument("--faces", action="store_true", help="include per-face records in JSON output")
    s.set_defaults(func=cmd_conformity)

    s = sub.add_parser("nonconformity", help="identity-indicator witness")
    common(s, cell=False)
    source(s)
    s.add_argument("--cell-id", type=int, default=0)
    s.set_defaults(func=cmd_nonconformity)

    s = sub.add_parser("converge", help="interpolation error convergence study (CSV)")
    common(s)
    s.add_argument("--levels", type=int, default=3)
    s.add_argument("--field", default="trig")
    s.add_argument("--base", type=int, default=4, help="subdivisions of the coarsest unit-cube grid")
    s.set_defaults(func=cmd_converge)

    s = sub.add_parser("interpolate", help="interpolate a field and write a .fef file")
    common(s, cell=False)
    source(s)
    s.add_argument("--field", default="trig")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_interpolate)

    s = sub.add_parser("mesh", help="write a generated grid in .m3 format")
    s.add_argument("--gen", required=True)
    s.add_argument("--refine", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mesh)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        ok = args.func(args)
    except (ValueError, OSError, mesh_mod.MeshError, element.ElementError) as exc:
        print(f"elem: error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
