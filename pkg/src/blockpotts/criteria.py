"""Model-choice criteria built from exact normalizing constants on blocks.

The generic criterion evaluates, for a candidate model and a reference
segmentation, minus twice the sum over blocks of

    log Z(theta, y restricted to the block, border colors)
  - log Z(psi, border colors)

plus a dimension penalty.  With 1x1 blocks and a fixed border this is the
pseudolikelihood-style criterion; with 1x1 blocks and no border it collapses
to the log-likelihood of a uniform-weight Gaussian mixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .fit import FitResult, neighbor_color_counts
from .grid import (
    BlockPartition,
    BorderMode,
    LatticeSpec,
    NeighborhoodSystem,
    block_border,
    regular_partition,
)
from .noise import HiddenPottsParams, log_emission_table
from .potts import (
    BorderCondition,
    PottsSpec,
    SitePotentials,
    partition_function_recursive,
)


@dataclass(frozen=True)
class CandidateModel:
    """One model under comparison: an adjacency system and a color count."""

    system: NeighborhoodSystem
    K: int

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("need at least two colors")

    @property
    def label(self) -> str:
        return f"{self.system.value}/K={self.K}"


@dataclass
class CriterionValue:
    model: CandidateModel
    name: str
    value: float
    d_m: int
    block_loglik: float
    theta_used: HiddenPottsParams


def parameter_count(K: int) -> int:
    """Free parameters of a K-color model: K means, K sds, one interaction."""
    return 2 * K + 1


def block_incomplete_loglik(
    y: np.ndarray,
    partition: BlockPartition,
    theta: HiddenPottsParams,
    model: CandidateModel,
    reference_field: np.ndarray | None = None,
) -> float:
    """Sum over blocks of the conditioned evidence minus the border-only log Z.

    reference_field supplies the border colors and must be present exactly
    when the partition uses fixed-field borders.  Blocks are summed in index
    order so the result is bit-stable.
    """
    fixed = partition.border_mode is BorderMode.FIXED_FIELD
    if fixed != (reference_field is not None):
        raise ValueError(
            "reference field must be supplied exactly when borders are fixed"
        )
    lattice = partition.lattice
    K = model.K
    if theta.emission.K != K:
        raise ValueError("emission components must match the candidate's K")
    y2 = np.asarray(y, dtype=float).reshape(lattice.height, lattice.width)
    emit = log_emission_table(y2, theta.emission)
    if reference_field is not None:
        ref = np.asarray(reference_field).reshape(lattice.height, lattice.width)
        if ref.size and (ref.min() < 0 or ref.max() >= K):
            raise ValueError("reference field colors out of range")

    if all(b.n == 1 for b in partition.blocks):
        if not fixed:
            return float(
                np.sum(logsumexp(emit, axis=-1)) - lattice.n * np.log(K)
            )
        v = theta.interaction * neighbor_color_counts(ref, K, model.system)
        return float(
            np.sum(logsumexp(emit + v, axis=-1)) - np.sum(logsumexp(v, axis=-1))
        )

    spec = PottsSpec(lattice, model.system, K, theta.interaction)
    flat_emit = emit.reshape(-1, K)
    ref_flat = ref.reshape(-1) if fixed else None
    total = 0.0
    for index, block in enumerate(partition.blocks):
        pots = SitePotentials(flat_emit[block.sites(lattice)])
        if fixed:
            border = BorderCondition.from_field(
                ref_flat, block_border(partition, index, model.system)
            )
            denominator = partition_function_recursive(spec, block=block, border=border)
        else:
            border = None
            denominator = _free_block_logz(
                block.height, block.width, K, model.system, float(theta.interaction)
            )
        numerator = partition_function_recursive(
            spec, block=block, potentials=pots, border=border
        )
        total += numerator - denominator
    return float(total)


@lru_cache(maxsize=4096)
def _free_block_logz(
    height: int, width: int, K: int, system: NeighborhoodSystem, interaction: float
) -> float:
    """log Z of a free-boundary block; depends only on the block's shape."""
    sub = PottsSpec(LatticeSpec(height, width), system, K, interaction)
    return partition_function_recursive(sub)


def blic(
    y: np.ndarray,
    b: int,
    theta: HiddenPottsParams,
    model: CandidateModel,
    border_field: np.ndarray | None = None,
    name: str | None = None,
) -> CriterionValue:
    """Criterion over the regular b-by-b tiling of the observation lattice."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ValueError("observations must form a 2-d field")
    lattice = LatticeSpec(*y.shape)
    mode = BorderMode.EMPTY if border_field is None else BorderMode.FIXED_FIELD
    partition = regular_partition(lattice, b, mode)
    loglik = block_incomplete_loglik(y, partition, theta, model, border_field)
    d_m = parameter_count(model.K)
    value = -2.0 * loglik + d_m * np.log(lattice.n)
    if name is None:
        name = f"BLIC_{b}x{b}" if border_field is None else f"BLIC_MF_{b}x{b}"
    return CriterionValue(model, name, float(value), d_m, float(loglik), theta)


def plic(y: np.ndarray, model: CandidateModel, icm_result: FitResult) -> CriterionValue:
    """1x1-block criterion with border and parameters from an ICM fit."""
    if icm_result.method != "ICM":
        raise ValueError("expected an ICM fit result")
    return blic(
        y, 1, icm_result.theta, model,
        border_field=icm_result.segmentation, name="PLIC",
    )


def bic_mf_like(
    y: np.ndarray, model: CandidateModel, em_result: FitResult
) -> CriterionValue:
    """1x1-block criterion with border and parameters from the simulated-field EM."""
    if em_result.method != "SimulatedField":
        raise ValueError("expected a simulated-field fit result")
    return blic(
        y, 1, em_result.theta, model,
        border_field=em_result.segmentation, name="BIC_MF",
    )


def delta_curve(values: Sequence[CriterionValue]) -> list[float]:
    """Consecutive differences value(K+1) - value(K) along an ascending K grid."""
    if len(values) < 2:
        raise ValueError("need at least two consecutive candidates")
    if len({v.name for v in values}) != 1 or len({v.model.system for v in values}) != 1:
        raise ValueError("values mix criteria or adjacency systems")
    ks = [v.model.K for v in values]
    if any(b - a != 1 for a, b in zip(ks, ks[1:])):
        raise ValueError("candidates must cover a contiguous ascending K range")
    return [b.value - a.value for a, b in zip(values, values[1:])]


def select_model(values: Sequence[CriterionValue]) -> CandidateModel:
    """Candidate with the smallest value; ties prefer smaller K, then G4."""
    if not values:
        raise ValueError("no criterion values to compare")
    return min(
        values,
        key=lambda v: (
            v.value,
            v.model.K,
            0 if v.model.system is NeighborhoodSystem.G4 else 1,
        ),
    ).model
