import os
import subprocess
import sys

import numpy as np
import pytest

from u2casimir import _backend, _pykernels
from u2casimir.boundary import random_admissible
from u2casimir.scattering import Delta, DeltaPrime, PiecewiseConstant, SquareBarrier

ckernels = pytest.importorskip("u2casimir._ckernels", reason="compiled kernels not built")

KAPPA = np.geomspace(1e-6, 80.0, 997)
POTENTIALS = [Delta(10.0), DeltaPrime(1.0, 0.4), SquareBarrier(3.0, 0.4),
              PiecewiseConstant(((1.0, 0.1), (5.0, 0.05), (0.5, 0.2)))]


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("L", [0.1, 1.0, 7.0])
def test_plate_bracket_backends_agree(seed, L):
    bc = random_admissible(np.random.default_rng(seed))
    args = (bc.det_u, bc.tr_u, bc.offdiag_sum, KAPPA, L)
    a, b = _pykernels.plate_bracket(*args), ckernels.plate_bracket(*args)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("v", POTENTIALS, ids=lambda v: v.grammar())
@pytest.mark.parametrize("theta", [0.0, 1e-7, 1.1, np.pi])
def test_comb_integrand_backends_agree(v, theta):
    args = (v.elements(), KAPPA, theta, 1.0, v.support_width)
    a, b = _pykernels.comb_integrand(*args), ckernels.comb_integrand(*args)
    assert np.allclose(a, b, rtol=1e-11, atol=1e-14)


@pytest.mark.parametrize("v", POTENTIALS, ids=lambda v: v.grammar())
def test_compiled_transfer_matrix(v):
    for k in (0.3, 2.0 + 0.5j, 7j):
        ref = _pykernels.propagate(v.elements(), np.array([k], dtype=complex))
        m, dm, sigma = ckernels.propagate_one(v.elements(), k)
        assert np.allclose(np.exp(sigma) * np.asarray(m), np.exp(ref[2][0]) * ref[0][..., 0], rtol=1e-12)


@pytest.mark.skipif(os.environ.get("U2CASIMIR_PURE_PYTHON") in ("1", "true", "yes"),
                    reason="numpy backend forced by the environment")
def test_compiled_backend_selected_by_default():
    assert _backend.BACKEND == "cython"


def test_environment_forces_pure_python():
    env = dict(os.environ, U2CASIMIR_PURE_PYTHON="1")
    code = ("from u2casimir import _backend, plate_energy, dirichlet; import math;"
            "print(_backend.BACKEND, abs(plate_energy(dirichlet(), 1.0).value + math.pi / 24) < 1e-12)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "True"]
