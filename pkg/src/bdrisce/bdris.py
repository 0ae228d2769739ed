"""Physically realizable BD-RIS reflection matrices.

A group-connected BD-RIS with N elements in K groups of N0 = N/K has a
block-diagonal reflection matrix whose blocks are unitary and symmetric.
Each block is obtained from a real symmetric reactance matrix X through
the lossless-network map

    Theta = (jX + Z0 I)^{-1} (jX - Z0 I),

with Z0 the reference impedance.  This module builds such matrices,
validates the unitarity/symmetry constraints, and flattens a reflection
state into the training-reflection-pattern (TRP) vector
``[1, vec(Theta_1*), ..., vec(Theta_K*)]`` used by the estimator
(column-major vec, conjugated entries).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-10
_CAYLEY_RESIDUAL_LIMIT = 1e-8


class NumericalError(RuntimeError):
    """A matrix routine failed to meet its accuracy contract."""


@dataclass(frozen=True)
class BdRisConfig:
    """Surface layout: ``n_elements`` reflecting elements in groups of ``group_size``."""

    n_elements: int
    group_size: int
    reference_impedance: float = 50.0

    def __post_init__(self):
        if self.n_elements < 1 or self.group_size < 1:
            raise ValueError("n_elements and group_size must be positive")
        if self.n_elements % self.group_size != 0:
            raise ValueError(
                f"group_size {self.group_size} must divide n_elements {self.n_elements}")
        if self.reference_impedance <= 0:
            raise ValueError("reference_impedance must be positive")

    @property
    def n_groups(self) -> int:
        return self.n_elements // self.group_size

    @property
    def trp_length(self) -> int:
        """Length of a vectorized TRP: group_size * n_elements + 1."""
        return self.group_size * self.n_elements + 1


@dataclass(frozen=True)
class ReactanceMatrix:
    """K real symmetric blocks, stacked as a (K, N0, N0) array, in ohms."""

    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=float)
        if b.ndim != 3 or b.shape[1] != b.shape[2]:
            raise ValueError("blocks must have shape (K, N0, N0)")
        if not np.array_equal(b, np.swapaxes(b, 1, 2)):
            raise ValueError("reactance blocks must be exactly symmetric")
        object.__setattr__(self, "blocks", b)


@dataclass(frozen=True)
class ScatteringMatrix:
    """K complex reflection blocks, stacked as a (K, N0, N0) array."""

    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim != 3 or b.shape[1] != b.shape[2]:
            raise ValueError("blocks must have shape (K, N0, N0)")
        object.__setattr__(self, "blocks", b)

    @property
    def n_groups(self) -> int:
        return self.blocks.shape[0]

    @property
    def group_size(self) -> int:
        return self.blocks.shape[1]

    @property
    def n_elements(self) -> int:
        return self.n_groups * self.group_size

    def to_dense(self) -> np.ndarray:
        """Dense N x N matrix, zero outside the diagonal blocks (test aid)."""
        k, n0, _ = self.blocks.shape
        dense = np.zeros((k * n0, k * n0), dtype=complex)
        for i in range(k):
            dense[i * n0:(i + 1) * n0, i * n0:(i + 1) * n0] = self.blocks[i]
        return dense


@dataclass(frozen=True)
class TrpVector:
    """One training reflection pattern, ``[1, vec(Theta_1*), ...]``."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 1 or e.size < 1:
            raise ValueError("entries must be a nonempty vector")
        if e[0] != 1 + 0j:
            raise ValueError("a TRP vector must start with exactly 1+0j")
        object.__setattr__(self, "entries", e)

    def __len__(self) -> int:
        return self.entries.size


@dataclass(frozen=True)
class ValidationReport:
    max_unitarity_residual: float
    max_symmetry_residual: float
    passed: bool


def _cayley_blocks(blocks: np.ndarray, z0: float) -> np.ndarray:
    """Batched lossless map of real symmetric blocks (..., N0, N0).

    Computed through the eigendecomposition X = Q diag(lam) Q^T, so each
    eigenvalue maps to the exactly unit-modulus (j*lam - z0)/(j*lam + z0);
    this stays accurate for arbitrarily large reactances, where forming
    the inverse directly loses digits.
    """
    lam, q = np.linalg.eigh(blocks)
    f = (1j * lam - z0) / (1j * lam + z0)
    theta = (q * f[..., None, :]) @ np.swapaxes(q, -1, -2)
    # residual of the defining equation (jX + z0 I) Theta = (jX - z0 I)
    jx = 1j * blocks
    eye = np.eye(blocks.shape[-1])
    lhs = (jx + z0 * eye) @ theta
    rhs = jx - z0 * eye
    num = np.linalg.norm(lhs - rhs, axis=(-2, -1))
    den = np.linalg.norm(rhs, axis=(-2, -1))
    if np.any(num > _CAYLEY_RESIDUAL_LIMIT * den):
        worst = float(np.max(num / den))
        raise NumericalError(
            f"reflection map residual {worst:.3e} exceeds {_CAYLEY_RESIDUAL_LIMIT:.0e}")
    return theta


def cayley_transform(block: np.ndarray, z0: float) -> np.ndarray:
    """Map one real symmetric reactance block to its unitary symmetric reflection.

    Returns (jX + z0 I)^{-1} (jX - z0 I); raises ValueError on an
    asymmetric block or nonpositive z0, and NumericalError if the result
    fails its residual check (which cannot happen for finite symmetric X).
    """
    x = np.asarray(block, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("block must be a square matrix")
    if not np.allclose(x, x.T, rtol=0.0, atol=0.0):
        raise ValueError("block must be symmetric")
    if z0 <= 0:
        raise ValueError("z0 must be positive")
    return _cayley_blocks(x[None], z0)[0]


def assemble_reflection(blocks) -> ScatteringMatrix:
    """Stack per-group reflection blocks into one block-diagonal state."""
    arrs = [np.asarray(b, dtype=complex) for b in blocks]
    if not arrs:
        raise ValueError("at least one block required")
    n0 = arrs[0].shape[0]
    for b in arrs:
        if b.ndim != 2 or b.shape != (n0, n0):
            raise ValueError("all blocks must be square with equal dimensions")
    return ScatteringMatrix(np.stack(arrs))


def random_reactance(config: BdRisConfig, rng: np.random.Generator) -> ReactanceMatrix:
    """Draw K independent random symmetric reactance blocks.

    Entries are i.i.d. Cauchy with scale Z0, then symmetrized as
    (A + A^T)/2.  The Cauchy scale is what makes the reflection states
    well spread: for 1x1 blocks the lossless map sends a Cauchy(Z0)
    reactance to an exactly uniform reflection phase, whereas light-tailed
    draws pile the phases up near pi and leave holes on the circle.
    """
    a = config.reference_impedance * rng.standard_cauchy(
        (config.n_groups, config.group_size, config.group_size))
    return ReactanceMatrix(0.5 * (a + np.swapaxes(a, 1, 2)))


def reflection_from_reactance(x: ReactanceMatrix, z0: float) -> ScatteringMatrix:
    """Apply the lossless map to every group of a reactance draw."""
    return ScatteringMatrix(_cayley_blocks(x.blocks, z0))


def vectorize_trp(theta: ScatteringMatrix) -> TrpVector:
    """Flatten a reflection state into its TRP vector.

    Entry 0 is the constant 1; after it come the conjugated column-major
    vectorizations of the blocks in group order, so that the inner product
    with the cascaded channel reproduces the reflected-path sum exactly.
    """
    k, n0, _ = theta.blocks.shape
    vecs = np.conj(theta.blocks.transpose(0, 2, 1).reshape(k * n0 * n0))
    return TrpVector(np.concatenate([np.ones(1, dtype=complex), vecs]))


def validate_scattering(theta: ScatteringMatrix, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check losslessness (unitary blocks) and reciprocity (symmetric blocks).

    Residuals are Frobenius norms of Theta_k^H Theta_k - I and
    Theta_k - Theta_k^T, maximized over groups.  Reports rather than
    raises: invalid states are data, not programming errors.
    """
    b = theta.blocks
    eye = np.eye(b.shape[-1])
    unit = np.linalg.norm(np.swapaxes(b.conj(), 1, 2) @ b - eye, axis=(1, 2))
    sym = np.linalg.norm(b - np.swapaxes(b, 1, 2), axis=(1, 2))
    max_unit = float(unit.max())
    max_sym = float(sym.max())
    return ValidationReport(max_unit, max_sym, max_unit <= tol and max_sym <= tol)
