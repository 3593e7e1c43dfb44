import os
import subprocess
import sys

import numpy as np
import pytest

from hybridgame import _kernels
from hybridgame.model import Structure
from hybridgame.oracle import build_mesh
from hybridgame.strategies import build_profile

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@needs_numba
def test_eval_backends_agree(params):
    coef, rate = build_profile(params, Structure.PI41).inflow.arrays
    t = np.random.default_rng(1).uniform(0, 50, 5000)
    a = _kernels.eval_cycle_numba(coef, rate, params.T, params.split, t)
    b = _kernels.eval_cycle_numpy(coef, rate, params.T, params.split, t)
    assert np.allclose(a, b, rtol=1e-14, atol=0)


@needs_numba
def test_rk4_backends_agree(params):
    coef, rate = build_profile(params, Structure.PI1).inflow.arrays
    m = build_mesh(params.T, params.tau, 0.3, 7.7, 500, even=False)
    args = (m.seg_t0, m.seg_dt, m.seg_n, m.seg_base, m.seg_phase, 3.0, coef, rate,
            np.array([-params.delta1, -params.delta2]))
    a = _kernels.rk4_linear_numba(*args)
    b = _kernels.rk4_linear_numpy(*args)
    assert a.shape == b.shape == (m.seg_n.sum() + 1,)
    assert np.allclose(a, b, rtol=1e-12)


def test_phase_boundary_convention():
    coef = np.array([[1.0], [2.0]])
    rate = np.zeros((2, 1))
    t = np.array([0.0, 0.5, 0.999999, 1.0, 1.5])
    for fn in (_kernels.eval_cycle_numpy, _kernels.eval_cycle_numba):
        assert list(fn(coef, rate, 1.0, 0.5, t)) == [1.0, 2.0, 2.0, 1.0, 2.0]


def test_env_flag_selects_numpy():
    env = {**os.environ, "HYBRIDGAME_NO_NUMBA": "1"}
    out = subprocess.run([sys.executable, "-c", "from hybridgame import BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
