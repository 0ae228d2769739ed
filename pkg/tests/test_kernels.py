import os
import subprocess
import sys

import numpy as np
import pytest

from bdrisce import kernels


def make_training_problem(seed=0, n_train=200, n_val=50, dim=18, iterations=800):
    rng = np.random.default_rng(seed)
    x_train = rng.standard_normal((n_train, dim))
    y_train = rng.random(n_train)
    x_val = rng.standard_normal((n_val, dim))
    y_val = rng.random(n_val)
    w0 = 0.01 * rng.standard_normal((dim, 2))
    batch_idx = rng.integers(0, n_train, size=(iterations, 32))
    return x_train, y_train, x_val, y_val, w0, batch_idx


def test_backend_reports_active_path():
    assert kernels.backend() in ("numba", "numpy")


def test_greedy_backends_agree():
    rng = np.random.default_rng(1)
    pool = rng.standard_normal((300, 9)) + 1j * rng.standard_normal((300, 9))
    pool /= np.linalg.norm(pool, axis=1, keepdims=True)
    pool_conj = np.ascontiguousarray(np.conj(pool))
    fast = kernels.greedy_loop(pool_conj, 40, 0)
    slow = kernels.greedy_loop_numpy(pool_conj, 40, 0)
    assert np.array_equal(fast, slow)


def test_train_backends_agree():
    args = make_training_problem()
    fast = kernels.train_loop(*args, 0.1, 1e-4, 200, 1)
    slow = kernels.train_loop_numpy(*args, 0.1, 1e-4, 200, 1)
    assert np.allclose(fast[0], slow[0], rtol=1e-9, atol=1e-12)  # best weights
    assert fast[1] == pytest.approx(slow[1], rel=1e-9)           # best error
    assert np.allclose(fast[3], slow[3], rtol=1e-9)              # loss history
    assert np.allclose(fast[5], slow[5], rtol=0, atol=0)         # lr history


def test_disable_flag_forces_numpy_path():
    env = dict(os.environ, BDRISCE_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from bdrisce import kernels; print(kernels.backend())"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "numpy"
