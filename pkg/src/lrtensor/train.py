"""Tensor-train construction by chained SVDs, with bidirectional sweeps.

Each separation applies a truncated SVD to the current remainder, with
the previous bond index stacked onto the active mode. The orthonormal
left vectors become a core; the singular values travel onward in the
remainder, so error accounting stays in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import DenseTensor, Shape, ShapeMismatchError, frobenius_norm, subtract
from .svd import SingularSpectrum, full_svd, tail_energy


class RankInfeasibleError(ValueError):
    """Requested bond rank exceeds what the separation step can deliver."""


@dataclass(frozen=True)
class TTDecomposition:
    """Chain of order-3 cores (bond_in, extent, bond_out), boundary bonds 1.

    `orthogonality` is "left" for the unidirectional sweep (all cores
    but the last are left-orthonormal) and "split" for the bidirectional
    sweep (left-orthonormal up to the meeting core, right-orthonormal
    after it; the meeting core carries the norm).
    """

    cores: tuple
    spectra: tuple
    step_tails: tuple
    mode_weights: tuple
    source_shape: Shape
    orthogonality: str = "left"
    step_stack_dims: tuple = ()
    step_matrix_shapes: tuple = ()

    @property
    def ranks(self) -> tuple:
        """Bond ranks r_1 .. r_{m-1}."""
        return tuple(c.shape[2] for c in self.cores[:-1])

    def tail_bound(self) -> float:
        """sqrt(sum of squared per-step truncation tails)."""
        return math.sqrt(sum(t ** 2 for t in self.step_tails))


def _max_ranks(extents: Sequence[int]) -> list:
    """Feasible bond ranks of an exact TT of a full tensor."""
    m = len(extents)
    ranks = []
    r_prev = 1
    for j in range(m - 1):
        right = math.prod(extents[j + 1 :])
        r_prev = min(r_prev * extents[j], right)
        ranks.append(r_prev)
    return ranks


def _check_rank(requested: int, feasible: int, step: int) -> int:
    if requested < 1:
        raise ValueError(f"bond rank at step {step} must be positive")
    if requested > feasible:
        raise RankInfeasibleError(
            f"rank {requested} infeasible at step {step}; feasible maximum is {feasible}"
        )
    return requested


def tt_svd(t: DenseTensor, ranks: Optional[Sequence[int]] = None) -> TTDecomposition:
    """Left-to-right TT-SVD truncated at the given bond ranks.

    `ranks` has one entry per bond (m-1 entries); None keeps full ranks.
    """
    extents = t.shape.extents
    m = len(extents)
    if ranks is None:
        ranks = _max_ranks(extents)
    ranks = [int(r) for r in ranks]
    if len(ranks) != m - 1:
        raise ShapeMismatchError(f"{len(ranks)} bond ranks supplied for {m} modes")
    wv = t.weighted_values()
    if m == 1:
        core = wv.reshape(1, extents[0], 1)
        return TTDecomposition(
            cores=(core,),
            spectra=(),
            step_tails=(),
            mode_weights=t.mode_weights,
            source_shape=t.shape,
        )
    cores = []
    spectra = []
    tails = []
    stack_dims = []
    shapes = []
    remainder = wv.reshape(extents[0], -1)
    r_prev = 1
    for j in range(m - 1):
        rows = r_prev * extents[j]
        remainder = remainder.reshape(rows, -1)
        shapes.append(remainder.shape)
        stack_dims.append(rows)
        r = _check_rank(ranks[j], min(remainder.shape), j + 1)
        U, s, Vt = full_svd(remainder)
        cores.append(U[:, :r].reshape(r_prev, extents[j], r))
        spectrum = SingularSpectrum(s)
        spectra.append(spectrum)
        tails.append(tail_energy(spectrum, r))
        remainder = s[:r, None] * Vt[:r]
        r_prev = r
    cores.append(remainder.reshape(r_prev, extents[-1], 1))
    return TTDecomposition(
        cores=tuple(cores),
        spectra=tuple(spectra),
        step_tails=tuple(tails),
        mode_weights=t.mode_weights,
        source_shape=t.shape,
        orthogonality="left",
        step_stack_dims=tuple(stack_dims),
        step_matrix_shapes=tuple(shapes),
    )


def tt_svd_bidirectional(
    t: DenseTensor, ranks: Optional[Sequence[int]] = None
) -> TTDecomposition:
    """TT-SVD with forward steps up to the middle, then backward steps.

    The first ceil((m-1)/2) bonds are separated left-to-right, the rest
    right-to-left on the mirrored remainder; the meeting core joins the
    two sweeps. Error accounting is identical to the unidirectional sweep.
    """
    extents = t.shape.extents
    m = len(extents)
    if ranks is None:
        ranks = _max_ranks(extents)
    ranks = [int(r) for r in ranks]
    if len(ranks) != m - 1:
        raise ShapeMismatchError(f"{len(ranks)} bond ranks supplied for {m} modes")
    if m <= 2:
        return tt_svd(t, ranks)
    forward = math.ceil((m - 1) / 2)
    wv = t.weighted_values()
    left_cores = []
    spectra_by_bond = [None] * (m - 1)
    tails_by_bond = [0.0] * (m - 1)
    stack_dims = []
    shapes = []
    remainder = wv.reshape(extents[0], -1)
    r_prev = 1
    for j in range(forward):
        rows = r_prev * extents[j]
        remainder = remainder.reshape(rows, -1)
        shapes.append(remainder.shape)
        stack_dims.append(rows)
        r = _check_rank(ranks[j], min(remainder.shape), j + 1)
        U, s, Vt = full_svd(remainder)
        left_cores.append(U[:, :r].reshape(r_prev, extents[j], r))
        spectrum = SingularSpectrum(s)
        spectra_by_bond[j] = spectrum
        tails_by_bond[j] = tail_energy(spectrum, r)
        remainder = s[:r, None] * Vt[:r]
        r_prev = r
    # Backward sweep over the mirrored remainder, peeling the last modes.
    right_cores = []
    r_next = 1
    for core_index in range(m - 1, forward, -1):
        bond = core_index - 1
        cols = extents[core_index] * r_next
        remainder = remainder.reshape(-1, cols)
        shapes.append(remainder.shape)
        stack_dims.append(cols)
        r = _check_rank(ranks[bond], min(remainder.shape), bond + 1)
        U, s, Vt = full_svd(remainder)
        right_cores.append(Vt[:r].reshape(r, extents[core_index], r_next))
        spectrum = SingularSpectrum(s)
        spectra_by_bond[bond] = spectrum
        tails_by_bond[bond] = tail_energy(spectrum, r)
        remainder = U[:, :r] * s[:r]
        r_next = r
    meeting = remainder.reshape(r_prev, extents[forward], r_next)
    cores = left_cores + [meeting] + right_cores[::-1]
    return TTDecomposition(
        cores=tuple(cores),
        spectra=tuple(spectra_by_bond),
        step_tails=tuple(tails_by_bond),
        mode_weights=t.mode_weights,
        source_shape=t.shape,
        orthogonality="split",
        step_stack_dims=tuple(stack_dims),
        step_matrix_shapes=tuple(shapes),
    )


def tt_reconstruct(d: TTDecomposition) -> DenseTensor:
    """Sequential contraction of the core chain, weights divided back out."""
    chain = d.cores[0]
    for core in d.cores[1:]:
        chain = np.tensordot(chain, core, axes=(chain.ndim - 1, 0))
    values = chain.reshape(d.source_shape.extents)
    if d.mode_weights is not None:
        for ax, w in enumerate(d.mode_weights):
            if w is None:
                continue
            reshape = [1] * values.ndim
            reshape[ax] = -1
            values = values / np.sqrt(w).reshape(reshape)
    return DenseTensor(d.source_shape, values, d.mode_weights)


def tt_error(t: DenseTensor, d: TTDecomposition) -> float:
    """Exact weighted Frobenius error of the reconstruction."""
    return frobenius_norm(subtract(t, tt_reconstruct(d)))


def tt_cost(ranks: Sequence[int]) -> int:
    """Rank-entry cost of the chain: r_1 + sum of r_{j-1} * r_j."""
    ranks = [int(r) for r in ranks]
    if not ranks:
        return 0
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be positive")
    return ranks[0] + sum(ranks[j - 1] * ranks[j] for j in range(1, len(ranks)))


def tt_storage(extents: Sequence[int], ranks: Sequence[int]) -> int:
    """Grid-inclusive storage: sum over cores of bond_in * extent * bond_out."""
    bonds = [1] + [int(r) for r in ranks] + [1]
    return int(
        sum(bonds[j] * int(extents[j]) * bonds[j + 1] for j in range(len(extents)))
    )
