"""Potts field simulation: single-site Gibbs sweeps and Swendsen-Wang updates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import gibbs_sweep_kernel, swendsen_wang_kernel
from .grid import NeighborhoodSystem
from .noise import EmissionParams, sample_emission
from .potts import PottsSpec, SitePotentials

DEFAULT_BURNIN = 500


@dataclass
class ChainState:
    """A field, how many updates produced it, and the generator driving it."""

    field: np.ndarray
    sweep_count: int
    rng: np.random.Generator


def initial_state(spec: PottsSpec, rng: np.random.Generator) -> ChainState:
    """Uniform random coloring as a chain starting point."""
    h, w = spec.lattice.height, spec.lattice.width
    return ChainState(rng.integers(0, spec.K, size=(h, w)), 0, rng)


def _potential_array(spec: PottsSpec, potentials) -> np.ndarray:
    h, w = spec.lattice.height, spec.lattice.width
    if potentials is None:
        return np.zeros((h, w, spec.K))
    table = potentials.table if isinstance(potentials, SitePotentials) else np.asarray(potentials)
    return np.ascontiguousarray(table.reshape(h, w, spec.K), dtype=float)


def gibbs_sweep(state: ChainState, spec: PottsSpec, potentials=None) -> ChainState:
    """One raster pass of draws from the full conditionals.

    With potentials set to log emissions this targets the posterior of the
    latent field given the observations.
    """
    pot = _potential_array(spec, potentials)
    field = np.ascontiguousarray(state.field, dtype=np.int64).copy()
    uniforms = state.rng.random((spec.lattice.height, spec.lattice.width))
    gibbs_sweep_kernel(
        field,
        float(spec.interaction),
        pot,
        uniforms,
        spec.K,
        spec.system is NeighborhoodSystem.G8,
    )
    return ChainState(field, state.sweep_count + 1, state.rng)


def swendsen_wang_step(state: ChainState, spec: PottsSpec) -> ChainState:
    """One cluster update targeting the prior Potts distribution."""
    if spec.interaction < 0:
        raise ValueError("cluster updates require a nonnegative interaction")
    h, w = spec.lattice.height, spec.lattice.width
    ndirs = 4 if spec.system is NeighborhoodSystem.G8 else 2
    edge_uniforms = state.rng.random((h, w, ndirs))
    color_uniforms = state.rng.random(h * w)
    field = np.ascontiguousarray(state.field, dtype=np.int64).copy()
    swendsen_wang_kernel(
        field,
        float(spec.interaction),
        spec.K,
        spec.system is NeighborhoodSystem.G8,
        edge_uniforms,
        color_uniforms,
    )
    return ChainState(field, state.sweep_count + 1, state.rng)


def simulate_hidden(
    spec: PottsSpec,
    emission: EmissionParams,
    burnin: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw a latent field by Swendsen-Wang, then observe it through the noise."""
    if burnin < 1:
        raise ValueError("burnin must be at least 1")
    if emission.K != spec.K:
        raise ValueError("emission components must match the number of colors")
    state = initial_state(spec, rng)
    for _ in range(burnin):
        state = swendsen_wang_step(state, spec)
    y = sample_emission(state.field, emission, rng)
    return state.field, y
