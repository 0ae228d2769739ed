"""Single-layer quadratic model trained on received-power measurements.

The received power under TRP v is |v^H h|^2, which in the real embedding
x = [Re(v); Im(v)] reads ||x^T R||^2 with the structured weight matrix

    R = [[Re(h), Im(h)],
         [Im(h), -Re(h)]].

Training fits an unconstrained (2n x 2) weight matrix W so that
||x^T W||^2 matches the measured powers, using mini-batch gradient
descent with a cyclic cosine learning-rate schedule and validation-based
snapshot selection.  The channel autocorrelation estimate is then read
off W W^T; the common phase of h never enters, since everything depends
on W only through that product.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .bdris import TrpVector
from .channel import AutocorrelationMatrix, CascadedChannel, PowerMeasurement
from .selection import TrpSet

NORMALIZATION_MODES = ("mean_power", "none")


@dataclass(frozen=True)
class RealInput:
    """Real embedding [Re(v); Im(v)] of a TRP vector."""

    entries: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.entries, dtype=float)
        if x.ndim != 1 or x.size < 2 or x.size % 2 != 0:
            raise ValueError("entries must be a real vector of even length")
        n = x.size // 2
        if x[0] != 1.0 or x[n] != 0.0:
            raise ValueError("embedding of a TRP must have x[0] = 1 and x[n] = 0")
        object.__setattr__(self, "entries", x)


@dataclass(frozen=True)
class WeightMatrix:
    """Unconstrained real (2n x 2) weights of the quadratic model."""

    entries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.entries, dtype=float)
        if w.ndim != 2 or w.shape[1] != 2 or w.shape[0] % 2 != 0:
            raise ValueError("entries must have shape (2n, 2)")
        if not np.isfinite(w).all():
            raise ValueError("weights must be finite")
        object.__setattr__(self, "entries", w)


@dataclass(frozen=True)
class RealChannelMatrix(WeightMatrix):
    """Structured weights built from a cascaded channel (swap-negate columns)."""

    def __post_init__(self):
        super().__post_init__()
        w = self.entries
        n = w.shape[0] // 2
        rebuilt = np.concatenate([w[n:, 0], -w[:n, 0]])
        if not np.array_equal(w[:, 1], rebuilt):
            raise ValueError("column 2 must be the swap-negate image of column 1")


@dataclass(frozen=True)
class TrainConfig:
    """Knobs of one training run; defaults fit the desk-scale scenario."""

    train_fraction: float = 0.8
    max_iterations: int = 5000
    lr_max: float = 0.1
    lr_min: float = 1e-4
    cosine_period: int = 1000
    batch_size: int = 32
    init_scale: float = 0.01
    normalization: str = "mean_power"
    seed: int = 0
    eval_every: int = 1

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.max_iterations < 1 or self.cosine_period < 1:
            raise ValueError("max_iterations and cosine_period must be positive")
        if self.lr_max <= 0 or self.lr_min < 0 or self.lr_min > self.lr_max:
            raise ValueError("need 0 <= lr_min <= lr_max with lr_max > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.init_scale <= 0:
            raise ValueError("init_scale must be positive")
        if self.normalization not in NORMALIZATION_MODES:
            raise ValueError(f"normalization must be one of {NORMALIZATION_MODES}")
        if self.eval_every < 1:
            raise ValueError("eval_every must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class TrainResult:
    """Best snapshot plus per-iteration histories of one training run."""

    best_weights: WeightMatrix
    best_validation_error: float
    best_iteration: int
    loss_history: np.ndarray
    validation_history: np.ndarray
    lr_history: np.ndarray
    normalization_factor: float

    def write_history(self, path) -> None:
        """Dump (iteration, training loss, validation error, learning rate) CSV."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "training_loss", "validation_error", "learning_rate"])
            for t in range(self.loss_history.size):
                val = self.validation_history[t]
                writer.writerow([t, repr(float(self.loss_history[t])),
                                 "" if np.isnan(val) else repr(float(val)),
                                 repr(float(self.lr_history[t]))])


def embed(v: TrpVector) -> RealInput:
    """Concatenate real and imaginary parts of a TRP, in that order."""
    return RealInput(np.concatenate([v.entries.real, v.entries.imag]))


def structured_weights(h: CascadedChannel) -> RealChannelMatrix:
    """Exact weight layout induced by a known cascaded channel."""
    re = h.entries.real
    im = h.entries.imag
    return RealChannelMatrix(np.block([[re[:, None], im[:, None]],
                                       [im[:, None], -re[:, None]]]))


def forward(x: RealInput, w: WeightMatrix) -> float:
    """Model output ||x^T W||^2, the predicted received power."""
    if x.entries.size != w.entries.shape[0]:
        raise ValueError("input and weight dimensions differ")
    proj = x.entries @ w.entries
    return float(proj @ proj)


def loss(inputs: Sequence[RealInput], targets: Sequence[float], w: WeightMatrix) -> float:
    """Mean squared error between measured and predicted powers."""
    if len(inputs) == 0:
        raise ValueError("empty batch")
    if len(inputs) != len(targets):
        raise ValueError("inputs and targets lengths differ")
    x = np.stack([xi.entries for xi in inputs])
    proj = x @ w.entries
    eta = proj[:, 0] ** 2 + proj[:, 1] ** 2
    return float(np.mean((np.asarray(targets, dtype=float) - eta) ** 2))


def gradient(inputs: Sequence[RealInput], targets: Sequence[float], w: WeightMatrix) -> np.ndarray:
    """Analytic loss gradient, (4/B) sum (eta - target) x x^T W."""
    if len(inputs) == 0:
        raise ValueError("empty batch")
    if len(inputs) != len(targets):
        raise ValueError("inputs and targets lengths differ")
    x = np.stack([xi.entries for xi in inputs])
    proj = x @ w.entries
    eta = proj[:, 0] ** 2 + proj[:, 1] ** 2
    resid = eta - np.asarray(targets, dtype=float)
    return (4.0 / len(inputs)) * (x.T @ (resid[:, None] * proj))


def lr_schedule(t: int, cfg: TrainConfig) -> float:
    """Cyclic cosine decay from lr_max to lr_min with period cosine_period."""
    if t < 0:
        raise ValueError("iteration index must be nonnegative")
    phase = (t % cfg.cosine_period) / cfg.cosine_period
    return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + np.cos(np.pi * phase))


def train(trps: TrpSet, measurements: Sequence[PowerMeasurement], cfg: TrainConfig) -> TrainResult:
    """Fit the quadratic model to (TRP, power) pairs.

    The data are shuffled once and split train/validation by
    ``train_fraction``; targets are divided by the training-set mean
    power (the model is homogeneous in the target scale, so this is
    exact, and without it the raw ~1e-10 W powers stall the descent).
    Gradient steps follow the cosine schedule; the returned weights are
    the snapshot with the smallest validation error.
    """
    d = len(trps)
    if len(measurements) != d:
        raise ValueError("one measurement per TRP required")
    if d < 2:
        raise ValueError("need at least two samples to split train/validation")
    for i, m in enumerate(measurements):
        if m.trp_index != i:
            raise ValueError("measurement trp_index must align with TRP order")
    targets = np.array([m.power for m in measurements], dtype=float)
    x = np.concatenate([trps.matrix.real, trps.matrix.imag], axis=1)

    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(d)
    n_train = round(cfg.train_fraction * d)
    n_train = min(max(n_train, 1), d - 1)
    train_idx, val_idx = perm[:n_train], perm[n_train:]
    if cfg.batch_size > n_train:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds training split {n_train}")

    factor = 1.0
    if cfg.normalization == "mean_power":
        mean = float(targets[train_idx].mean())
        if mean > 0:
            factor = mean
    scaled = targets / factor

    m_dim = x.shape[1]
    w0 = cfg.init_scale * rng.standard_normal((m_dim, 2))
    batch_idx = rng.integers(0, n_train, size=(cfg.max_iterations, cfg.batch_size))
    best_w, best_err, best_iter, loss_hist, val_hist, lr_hist = kernels.train_loop(
        np.ascontiguousarray(x[train_idx]), scaled[train_idx],
        np.ascontiguousarray(x[val_idx]), scaled[val_idx],
        w0, batch_idx, cfg.lr_max, cfg.lr_min, cfg.cosine_period, cfg.eval_every)
    return TrainResult(WeightMatrix(best_w), float(best_err), int(best_iter),
                       loss_hist, val_hist, lr_hist, factor)


def recover_autocorrelation(w: WeightMatrix, normalization_factor: float) -> AutocorrelationMatrix:
    """Read the channel autocorrelation estimate off S = W W^T.

    With S split into n x n blocks, interior entries average the two
    redundant copies: Re(G) from (S11 + S22)/2 and Im(G) from
    (S21 - S12)/2.  Entries involving index 0 are the exception: input
    coordinate n (the imaginary part of the constant leading TRP entry)
    is structurally zero, so row n of S never receives gradient and the
    lower-block copies of the row-0 information are untrained.  Those
    entries are therefore read from the upper blocks alone, which the
    measurements do pin down.  On structured weights both copies agree
    and the result is exactly h h^H; any W -> W Q with Q orthogonal
    leaves the estimate unchanged.
    """
    s = w.entries @ w.entries.T
    s = 0.5 * (s + s.T)
    n = s.shape[0] // 2
    re = 0.5 * (s[:n, :n] + s[n:, n:])
    im = 0.5 * (s[n:, :n] - s[:n, n:])
    re[0, :] = s[0, :n]
    re[:, 0] = s[:n, 0]
    im[1:, 0] = s[n + 1:, 0]
    im[0, 1:] = -s[0, n + 1:]
    im[0, 0] = 0.0
    return AutocorrelationMatrix(normalization_factor * (re + 1j * im))
