"""Hot inner loops: greedy TRP selection and the training iteration.

Both kernels are plain numpy functions that numba can compile unchanged.
When numba is importable (and not disabled) the module exposes the
``@njit``-compiled versions; otherwise the pure-numpy implementations run
as-is.  Set ``BDRISCE_DISABLE_NUMBA=1`` to force the numpy path, e.g. for
debugging or on platforms without a working numba.  ``benchmarks/
bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLE_FLAG = os.environ.get("BDRISCE_DISABLE_NUMBA", "").strip()
_NUMBA_ACTIVE = numba is not None and _DISABLE_FLAG in ("", "0")


def backend() -> str:
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if _NUMBA_ACTIVE else "numpy"


def _greedy_loop(pool_conj, d, first):
    # pool_conj: (C, n) complex128, rows are conjugated unit-norm TRPs.
    # Keeps one running max-|corr|-to-selected value per candidate, so the
    # whole selection costs O(C*d) inner products.  Selected entries are
    # pinned to +inf so argmin never revisits them; argmin breaks ties by
    # lowest index.
    order = np.empty(d, np.int64)
    order[0] = first
    cache = np.abs(np.dot(pool_conj, np.conj(pool_conj[first])))
    cache[first] = np.inf
    for k in range(1, d):
        best = np.argmin(cache)
        order[k] = best
        corr = np.abs(np.dot(pool_conj, np.conj(pool_conj[best])))
        cache = np.maximum(cache, corr)
        cache[best] = np.inf
    return order


def _train_loop(x_train, y_train, x_val, y_val, w0, batch_idx,
                lr_max, lr_min, cosine_period, eval_every):
    # Mini-batch gradient descent on the squared-power residual with a
    # cyclic cosine learning-rate schedule.  batch_idx is pregenerated
    # (iterations, batch) so the numba and numpy paths consume identical
    # randomness.  Validation error is evaluated every eval_every steps
    # (and on the last step); skipped steps hold NaN.  Returns the weight
    # snapshot with the lowest validation error.
    iterations = batch_idx.shape[0]
    batch = batch_idx.shape[1]
    w = w0.copy()
    loss_hist = np.empty(iterations)
    val_hist = np.full(iterations, np.nan)
    lr_hist = np.empty(iterations)
    best_err = np.inf
    best_iter = -1
    best_w = w0.copy()
    for t in range(iterations):
        lr = lr_min + 0.5 * (lr_max - lr_min) * (
            1.0 + np.cos(np.pi * (t % cosine_period) / cosine_period))
        lr_hist[t] = lr
        xb = x_train[batch_idx[t]]
        yb = y_train[batch_idx[t]]
        proj = np.dot(xb, w)
        eta = proj[:, 0] ** 2 + proj[:, 1] ** 2
        resid = eta - yb
        loss_hist[t] = np.mean(resid ** 2)
        grad = (4.0 / batch) * np.dot(np.ascontiguousarray(xb.T),
                                      resid.reshape(-1, 1) * proj)
        w = w - lr * grad
        if (t + 1) % eval_every == 0 or t == iterations - 1:
            pv = np.dot(x_val, w)
            ev = pv[:, 0] ** 2 + pv[:, 1] ** 2
            verr = np.mean((ev - y_val) ** 2)
            val_hist[t] = verr
            if verr < best_err:
                best_err = verr
                best_iter = t
                best_w = w.copy()
    return best_w, best_err, best_iter, loss_hist, val_hist, lr_hist


# Pure-numpy references, always available (used by the benchmark).
greedy_loop_numpy = _greedy_loop
train_loop_numpy = _train_loop

if _NUMBA_ACTIVE:
    greedy_loop = numba.njit(cache=True)(_greedy_loop)
    train_loop = numba.njit(cache=True)(_train_loop)
else:
    greedy_loop = _greedy_loop
    train_loop = _train_loop
