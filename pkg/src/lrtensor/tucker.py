"""Higher-order SVD: Tucker construction, reconstruction, error, cost.

Factors are computed from the original tensor's unfoldings (classical
HOSVD), stored in weighted coordinates so their columns are plainly
orthonormal. The core is obtained by a single projection pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .core import DenseTensor, Shape, ShapeMismatchError, frobenius_norm, subtract
from .svd import SingularSpectrum, full_svd, tail_energy


@dataclass(frozen=True)
class TuckerDecomposition:
    """Core tensor plus per-mode orthonormal factors and mode spectra."""

    core: DenseTensor
    factors: tuple
    mode_spectra: tuple
    mode_weights: tuple
    source_shape: Shape

    @property
    def ranks(self) -> tuple:
        return tuple(f.shape[1] for f in self.factors)

    def tail_bound(self) -> float:
        """sqrt(sum over modes of squared discarded tail energies)."""
        total = 0.0
        for spectrum, r in zip(self.mode_spectra, self.ranks):
            total += tail_energy(spectrum, r) ** 2
        return math.sqrt(total)


def _mode_product(values: np.ndarray, mat: np.ndarray, mode: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(mat, values, axes=(1, mode)), 0, mode)


def hosvd(t: DenseTensor, ranks: Sequence[int]) -> TuckerDecomposition:
    """Truncated higher-order SVD at the given per-mode ranks."""
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != t.ndim:
        raise ShapeMismatchError(
            f"{len(ranks)} ranks supplied for {t.ndim} modes"
        )
    for j, (r, n) in enumerate(zip(ranks, t.shape.extents)):
        if not 1 <= r <= n:
            raise ValueError(f"rank {r} for mode {j} out of range 1..{n}")
    wv = t.weighted_values()
    factors = []
    spectra = []
    for j in range(t.ndim):
        mat = np.moveaxis(wv, j, 0).reshape(t.shape.extents[j], -1)
        U, s, _ = full_svd(mat)
        factors.append(U[:, : ranks[j]])
        spectra.append(SingularSpectrum(s))
    core = wv
    for j, factor in enumerate(factors):
        core = _mode_product(core, factor.T, j)
    return TuckerDecomposition(
        core=DenseTensor.from_array(core, cap=t.shape.cap),
        factors=tuple(factors),
        mode_spectra=tuple(spectra),
        mode_weights=t.mode_weights,
        source_shape=t.shape,
    )


def tucker_reconstruct(d: TuckerDecomposition) -> DenseTensor:
    """Contract the core with all factors and divide the weights back out."""
    values = d.core.values
    for j, factor in enumerate(d.factors):
        values = _mode_product(values, factor, j)
    if values.shape != d.source_shape.extents:
        raise ShapeMismatchError("factor and core dimensions are inconsistent")
    if d.mode_weights is not None:
        for ax, w in enumerate(d.mode_weights):
            if w is None:
                continue
            reshape = [1] * values.ndim
            reshape[ax] = -1
            values = values / np.sqrt(w).reshape(reshape)
    return DenseTensor(d.source_shape, values, d.mode_weights)


def tucker_error(t: DenseTensor, d: TuckerDecomposition) -> float:
    """Exact weighted Frobenius error of the reconstruction."""
    return frobenius_norm(subtract(t, tucker_reconstruct(d)))


def tucker_cost(ranks: Sequence[int]) -> int:
    """Number of core-tensor entries: the product of the ranks."""
    ranks = [int(r) for r in ranks]
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be positive")
    return math.prod(ranks)


def tucker_factor_storage(extents: Sequence[int], ranks: Sequence[int]) -> int:
    """Entries held by the factor matrices: sum of extent * rank."""
    return int(sum(int(n) * int(r) for n, r in zip(extents, ranks)))
