"""Compare the compiled and numpy kernels on per-cell workloads.

Run ``python benchmarks/bench_kernels.py``; add ``--study`` to also time a full
convergence level under both backends (each in a fresh interpreter).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from symcurl import _kernels
from symcurl.polyspace import exponents, quadrature

STUDY = (
    "import time; from symcurl import analysis, _kernels;"
    "U, C = analysis.trig_field(); t = time.perf_counter();"
    "analysis.convergence_study(U, C, {k}, 2, '{cell}', 4);"
    "print(_kernels.BACKEND, round(time.perf_counter() - t, 2))"
)


def bench_kernels(repeat):
    if not _kernels.COMPILED_KERNELS:
        print("compiled extension not built; only numpy kernels available")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20} {'cell':<4} {'k':>2} {'points':>6} {'numpy us':>10} {'cython us':>10} {'speedup':>8}")
    for cell in ("tet", "hex"):
        for k in (1, 2, 3):
            exps = exponents(cell, k)
            npts = len(quadrature(cell, max(2 * k + 2, 6)).points)
            xi = rng.uniform(-1, 1, (npts, 3))
            coeffs = rng.standard_normal((len(exps), 9))
            phi = _kernels.py_monomials(xi, exps, k)
            dphi = _kernels.py_monomial_gradients(xi, exps, k)
            cases = {
                "monomials": (xi, exps, k),
                "monomial_gradients": (xi, exps, k),
                "matrix_values": (phi, coeffs),
                "matrix_curls": (dphi, coeffs),
            }
            for name, args in cases.items():
                if name not in _kernels.COMPILED_KERNELS:
                    continue
                py, c = _kernels.PYTHON_KERNELS[name], _kernels.COMPILED_KERNELS[name]
                assert np.allclose(py(*args), c(*args), rtol=1e-12, atol=1e-12)
                t_py = min(timeit.repeat(lambda: py(*args), number=repeat, repeat=3)) / repeat * 1e6
                t_c = min(timeit.repeat(lambda: c(*args), number=repeat, repeat=3)) / repeat * 1e6
                print(f"{name:<20} {cell:<4} {k:>2} {npts:>6} {t_py:>10.1f} {t_c:>10.1f} {t_py / t_c:>8.1f}")


def bench_study(k, cell):
    for env_extra in ({}, {"SYMCURL_PURE_PYTHON": "1"}):
        env = dict(os.environ, **env_extra)
        out = subprocess.run([sys.executable, "-c", STUDY.format(k=k, cell=cell)], env=env,
                             capture_output=True, text=True, check=True)
        print(f"convergence study {cell} k={k}, 2 levels from cube-{cell}:4 ->", out.stdout.strip(), "s")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=2000)
    p.add_argument("--study", action="store_true")
    args = p.parse_args()
    bench_kernels(args.repeat)
    if args.study:
        for cell in ("tet", "hex"):
            bench_study(2, cell)


if __name__ == "__main__":
    main()
