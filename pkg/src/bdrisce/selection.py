"""Candidate TRP pools and low-mutual-correlation subset selection.

A pool of random valid reflection states is generated first; the training
set is then chosen from it either uniformly at random or by the
sequential greedy rule that, at every step, admits the candidate whose
worst correlation against the already-selected set is smallest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .bdris import BdRisConfig, TrpVector, _cayley_blocks


@dataclass(frozen=True)
class CandidatePool:
    """Stack of candidate TRPs, one per row of ``matrix``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] < 1:
            raise ValueError("matrix must be a nonempty (pool_size, trp_length) array")
        object.__setattr__(self, "matrix", m)

    @property
    def pool_size(self) -> int:
        return self.matrix.shape[0]

    def __len__(self) -> int:
        return self.pool_size

    def trp(self, i: int) -> TrpVector:
        return TrpVector(self.matrix[i].copy())

    @cached_property
    def trps(self) -> list[TrpVector]:
        return [self.trp(i) for i in range(self.pool_size)]


@dataclass(frozen=True)
class TrpSet:
    """Ordered selection out of a pool, with provenance indices."""

    matrix: np.ndarray
    source_indices: tuple[int, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        idx = tuple(int(i) for i in self.source_indices)
        if m.ndim != 2 or m.shape[0] != len(idx):
            raise ValueError("matrix rows and source_indices must correspond")
        if len(set(idx)) != len(idx):
            raise ValueError("source_indices must not repeat")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "source_indices", idx)

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def selected(self) -> list[TrpVector]:
        return [TrpVector(self.matrix[i].copy()) for i in range(len(self))]


def correlation(a: TrpVector, b: TrpVector) -> complex:
    """Normalized inner product a^H b / (|a| |b|)."""
    if len(a) != len(b):
        raise ValueError("TRP lengths differ")
    na = np.linalg.norm(a.entries)
    nb = np.linalg.norm(b.entries)
    return complex(a.entries.conj() @ b.entries / (na * nb))


def build_pool(config: BdRisConfig, pool_size: int, rng: np.random.Generator) -> CandidatePool:
    """Generate ``pool_size`` valid TRPs from random reactance draws.

    Vectorized equivalent of repeatedly drawing a reactance, applying the
    lossless map, and flattening; consumes the generator stream in the
    same order as the sequential route, so pools with a common seed are
    prefix-consistent across sizes.
    """
    if pool_size < 1:
        raise ValueError("pool_size must be positive")
    k, n0 = config.n_groups, config.group_size
    a = config.reference_impedance * rng.standard_cauchy((pool_size, k, n0, n0))
    x = 0.5 * (a + np.swapaxes(a, -1, -2))
    theta = _cayley_blocks(x, config.reference_impedance)
    vecs = np.conj(theta.transpose(0, 1, 3, 2).reshape(pool_size, k * n0 * n0))
    matrix = np.concatenate([np.ones((pool_size, 1), dtype=complex), vecs], axis=1)
    return CandidatePool(matrix)


def greedy_select(pool: CandidatePool, d: int) -> TrpSet:
    """Sequential min-max-correlation selection of ``d`` TRPs.

    Starts from pool index 0 (the pool itself is already random); each
    following step admits the candidate minimizing the maximum |corr|
    against everything selected so far, ties going to the lowest index.
    A per-candidate running maximum keeps the cost at O(pool_size * d)
    inner products.
    """
    if not 1 <= d <= pool.pool_size:
        raise ValueError(f"d must be in [1, {pool.pool_size}]")
    norms = np.linalg.norm(pool.matrix, axis=1, keepdims=True)
    unit_conj = np.ascontiguousarray(np.conj(pool.matrix / norms))
    order = kernels.greedy_loop(unit_conj, d, 0)
    idx = tuple(int(i) for i in order)
    return TrpSet(pool.matrix[list(idx)].copy(), idx)


def random_select(pool: CandidatePool, d: int, rng: np.random.Generator) -> TrpSet:
    """Uniform without-replacement baseline selection."""
    if not 1 <= d <= pool.pool_size:
        raise ValueError(f"d must be in [1, {pool.pool_size}]")
    idx = tuple(int(i) for i in rng.choice(pool.pool_size, size=d, replace=False))
    return TrpSet(pool.matrix[list(idx)].copy(), idx)


def max_pairwise_correlation(trp_set: TrpSet) -> float:
    """Largest |corr| over unordered pairs; the selection objective."""
    if len(trp_set) < 2:
        raise ValueError("need at least two TRPs")
    unit = trp_set.matrix / np.linalg.norm(trp_set.matrix, axis=1, keepdims=True)
    gram = np.abs(unit.conj() @ unit.T)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())
