"""Potts sufficient statistics and exact normalizing constants on blocks.

Two routes to the same quantity: full enumeration (the ground-truth oracle,
feasible only on tiny blocks) and a forward lag recursion that eliminates
sites along the short block dimension, keeping a message over the last few
site colors.  Both support per-site log potentials (evidence) and a fixed
color assignment on the block border.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .grid import LatticeSpec, NeighborhoodSystem, Rect, _border_sites

ENUMERATION_BITS = 25.0  # |A|*log2(K) cap for brute force
MESSAGE_BITS = 22.0  # r*log2(K) cap for the recursion message


@dataclass(frozen=True)
class PottsSpec:
    """A Potts model: lattice, adjacency, number of colors, interaction strength."""

    lattice: LatticeSpec
    system: NeighborhoodSystem
    K: int
    interaction: float

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("need at least two colors")


@dataclass(frozen=True, eq=False)
class SitePotentials:
    """Per-site log weights g_i(k), row-major over the domain (block or lattice)."""

    table: np.ndarray  # (n_sites, K)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2:
            raise ValueError("potentials must be a (n_sites, K) table")
        if not np.all(np.isfinite(table)):
            raise ValueError("potentials must be finite")
        object.__setattr__(self, "table", table)


@dataclass(frozen=True)
class BorderCondition:
    """Fixed colors on a block border, as a site-index -> color map."""

    values: dict[int, int]

    @classmethod
    def from_field(cls, field: np.ndarray, sites) -> "BorderCondition":
        flat = np.asarray(field).ravel()
        return cls({int(j): int(flat[j]) for j in sites})


def sufficient_statistic(
    field: np.ndarray, lattice: LatticeSpec, system: NeighborhoodSystem
) -> int:
    """Number of monochromatic edges of the field, each undirected edge once."""
    x = np.asarray(field)
    if x.shape != (lattice.height, lattice.width):
        x = x.reshape(lattice.height, lattice.width)
    if x.size and x.min() < 0:
        raise ValueError("colors must be nonnegative")
    total = int(np.sum(x[:, :-1] == x[:, 1:])) + int(np.sum(x[:-1, :] == x[1:, :]))
    if system is NeighborhoodSystem.G8:
        total += int(np.sum(x[:-1, :-1] == x[1:, 1:]))
        total += int(np.sum(x[:-1, 1:] == x[1:, :-1]))
    return total


def conditioned_statistic(
    block_field: np.ndarray,
    block: Rect,
    border: BorderCondition | None,
    lattice: LatticeSpec,
    system: NeighborhoodSystem,
) -> int:
    """Matching edges inside the block, plus matches against the fixed border."""
    x = np.asarray(block_field).reshape(block.height, block.width)
    sub = LatticeSpec(block.height, block.width)
    total = sufficient_statistic(x, sub, system)
    if border is None:
        return total
    _check_border_domain(border, block, lattice, system)
    flat = x.ravel()
    for local, j in _cross_edges(lattice, block, system):
        if flat[local] == border.values[j]:
            total += 1
    return total


def partition_function_bruteforce(
    spec: PottsSpec,
    potentials: SitePotentials | None = None,
    border: BorderCondition | None = None,
    block: Rect | None = None,
) -> float:
    """log of the normalizing constant by full enumeration (tiny blocks only)."""
    block = block or Rect(0, 0, spec.lattice.height, spec.lattice.width)
    n = block.n
    K = spec.K
    if n * math.log2(K) > ENUMERATION_BITS:
        raise ValueError(
            f"enumeration bound exceeded: {n} sites with {K} colors"
        )
    table = _evidence_table(spec, block, potentials, border, fold_border=False)
    configs = _all_configs(K, n)  # (K^n, n)
    score = np.zeros(len(configs))
    for a, b in _internal_edges(block, spec.system):
        score += spec.interaction * (configs[:, a] == configs[:, b])
    if border is not None:
        _check_border_domain(border, block, spec.lattice, spec.system)
        for local, j in _cross_edges(spec.lattice, block, spec.system):
            score += spec.interaction * (configs[:, local] == border.values[j])
    score += table[np.arange(n)[None, :], configs].sum(axis=1)
    return float(logsumexp(score))


def partition_function_recursive(
    spec: PottsSpec,
    block: Rect | None = None,
    potentials: SitePotentials | None = None,
    border: BorderCondition | None = None,
) -> float:
    """log of the normalizing constant by the forward lag recursion.

    Sites are eliminated along the shorter block dimension so the message
    covers the last r site colors, r = min(h, w) for G4 and min(h, w) + 1
    for G8; cost O(n * K^(r+1)).  Border matches are folded into the
    per-site potentials beforehand, so one code path covers all cases.
    """
    block = block or Rect(0, 0, spec.lattice.height, spec.lattice.width)
    K = spec.K
    lag_bound = min(block.height, block.width) + (
        1 if spec.system is NeighborhoodSystem.G8 else 0
    )
    if lag_bound * math.log2(K) > MESSAGE_BITS:
        raise ValueError(
            f"message-size bound exceeded: lag {lag_bound} with {K} colors"
        )
    table = _evidence_table(spec, block, potentials, border, fold_border=True)
    order, lag_sets = _elimination_plan(
        block.height, block.width, spec.system is NeighborhoodSystem.G8
    )
    r = max((lag for lags in lag_sets for lag in lags), default=0)
    psi = spec.interaction
    colors = np.arange(K)
    msg = np.zeros(1)
    length = 0
    for local, lags in zip(order, lag_sets):
        step = np.tile(table[local], (len(msg), 1))
        for lag in lags:
            prev = _digit(K, length, lag)
            step += psi * (prev[:, None] == colors[None, :])
        full = (msg[:, None] + step).reshape(-1)
        if length + 1 > r:
            full = logsumexp(full.reshape(K, -1), axis=0)
        else:
            length += 1
        msg = full
    return float(logsumexp(msg))


# ---------------------------------------------------------------------------
# internals

def _all_configs(K: int, n: int) -> np.ndarray:
    """All K^n colorings as rows; site 0 is the most significant digit."""
    idx = np.arange(K**n)
    return (idx[:, None] // K ** np.arange(n - 1, -1, -1)[None, :]) % K


@lru_cache(maxsize=256)
def _digit_cached(K: int, length: int, lag: int) -> np.ndarray:
    idx = np.arange(K**length)
    return (idx // K ** (lag - 1)) % K


def _digit(K: int, length: int, lag: int) -> np.ndarray:
    """Color of the site eliminated `lag` steps ago, per message index."""
    return _digit_cached(K, length, lag)


@lru_cache(maxsize=1024)
def _elimination_plan(height: int, width: int, diagonal: bool):
    """Block-local site order and per-site predecessor lags.

    Sites are visited down columns of the shorter dimension (transposing the
    block if needed); each lag addresses an already-eliminated neighbor.
    """
    transposed = height > width
    short = min(height, width)
    long_ = max(height, width)
    order = []
    lag_sets = []
    for a in range(long_):
        for b in range(short):
            r, c = (a, b) if transposed else (b, a)
            order.append(r * width + c)
            lags = []
            if b > 0:
                lags.append(1)
            if a > 0:
                lags.append(short)
                if diagonal:
                    if b > 0:
                        lags.append(short + 1)
                    if b < short - 1:
                        lags.append(short - 1)
            lag_sets.append(tuple(lags))
    return tuple(order), tuple(lag_sets)


@lru_cache(maxsize=4096)
def _internal_edges(block: Rect, system: NeighborhoodSystem):
    """Undirected edges between block sites, as block-local index pairs."""
    h, w = block.height, block.width
    forward = [(0, 1), (1, 0)]
    if system is NeighborhoodSystem.G8:
        forward += [(1, 1), (1, -1)]
    edges = []
    for r in range(h):
        for c in range(w):
            for dr, dc in forward:
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w:
                    edges.append((r * w + c, rr * w + cc))
    return tuple(edges)


@lru_cache(maxsize=4096)
def _cross_edges(lattice: LatticeSpec, block: Rect, system: NeighborhoodSystem):
    """Edges from block sites (local index) to outside sites (lattice index)."""
    edges = []
    for r in range(block.height):
        for c in range(block.width):
            row, col = block.row0 + r, block.col0 + c
            for dr, dc in system.offsets:
                rr, cc = row + dr, col + dc
                if lattice.contains(rr, cc) and not block.contains_site(rr, cc):
                    edges.append((r * block.width + c, lattice.site(rr, cc)))
    return tuple(edges)


def _check_border_domain(
    border: BorderCondition, block: Rect, lattice: LatticeSpec, system: NeighborhoodSystem
) -> None:
    expected = set(_border_sites(lattice, block, system))
    if set(border.values) != expected:
        raise ValueError("border condition does not match the block border")


def _evidence_table(
    spec: PottsSpec,
    block: Rect,
    potentials: SitePotentials | None,
    border: BorderCondition | None,
    fold_border: bool,
) -> np.ndarray:
    """Per-site (n, K) log-potential table, optionally with border matches added."""
    n, K = block.n, spec.K
    if potentials is None:
        table = np.zeros((n, K))
    else:
        table = np.asarray(potentials.table, dtype=float)
        if table.shape != (n, K):
            raise ValueError(
                f"potentials shape {table.shape} does not match block ({n}, {K})"
            )
        table = table.copy()
    if border is not None:
        values = np.asarray(list(border.values.values()))
        if values.size and (values.min() < 0 or values.max() >= K):
            raise ValueError("border colors out of range")
        if fold_border:
            _check_border_domain(border, block, spec.lattice, spec.system)
            for local, j in _cross_edges(spec.lattice, block, spec.system):
                table[local, border.values[j]] += spec.interaction
    return table
