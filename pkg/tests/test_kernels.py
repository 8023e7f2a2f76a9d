import os
import subprocess
import sys

import numpy as np
import pytest

from symcurl import _kernels
from symcurl.polyspace import exponents


@pytest.fixture
def inputs():
    rng = np.random.default_rng(5)
    exps = np.asarray(exponents("hex", 3))
    x = rng.uniform(-1, 1, (50, 3))
    return x, exps, rng


def test_numpy_monomials_oracle(inputs):
    x, exps, _ = inputs
    V = _kernels.py_monomials(x, exps, 3)
    np.testing.assert_allclose(V, np.prod(x[:, None, :] ** exps[None], axis=2))


@pytest.mark.skipif(not _kernels.COMPILED_KERNELS, reason="compiled extension not built")
def test_backends_agree(inputs):
    x, exps, rng = inputs
    k = 3
    for name, fn in _kernels.COMPILED_KERNELS.items():
        py = _kernels.PYTHON_KERNELS[name]
        if name in ("monomials", "monomial_gradients"):
            args = (x, exps, k)
        else:
            args = (rng.normal(size=(50, len(exps), 3)), rng.normal(size=(len(exps), 9)))
        np.testing.assert_allclose(fn(*args), py(*args), rtol=1e-13, atol=1e-13)


def test_pure_python_switch():
    env = dict(os.environ, SYMCURL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from symcurl import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
