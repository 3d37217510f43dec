"""Lattice geometry: rectangular grids, G4/G8 adjacency, block partitions and borders."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache


class NeighborhoodSystem(Enum):
    """First-order (rook) or second-order (rook + diagonal) adjacency on the grid."""

    G4 = "G4"
    G8 = "G8"

    @property
    def offsets(self) -> tuple[tuple[int, int], ...]:
        """(row, col) displacements of the neighbors of an interior site."""
        rook = ((-1, 0), (0, -1), (0, 1), (1, 0))
        if self is NeighborhoodSystem.G4:
            return rook
        return rook + ((-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass(frozen=True)
class LatticeSpec:
    """Rectangular grid of sites, indexed row-major 0..n-1."""

    height: int
    width: int

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("lattice dimensions must be positive")

    @property
    def n(self) -> int:
        return self.height * self.width

    def site(self, row: int, col: int) -> int:
        return row * self.width + col

    def coords(self, index: int) -> tuple[int, int]:
        return divmod(index, self.width)

    def contains(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width


@dataclass(frozen=True)
class Rect:
    """Contiguous rectangular block of sites, rows row0..row0+height-1 etc."""

    row0: int
    col0: int
    height: int
    width: int

    @property
    def n(self) -> int:
        return self.height * self.width

    def sites(self, lattice: LatticeSpec) -> list[int]:
        """Lattice indices of the block's sites, block-row-major order."""
        return [
            lattice.site(self.row0 + r, self.col0 + c)
            for r in range(self.height)
            for c in range(self.width)
        ]

    def contains_site(self, row: int, col: int) -> bool:
        return (
            self.row0 <= row < self.row0 + self.height
            and self.col0 <= col < self.col0 + self.width
        )


class BorderMode(Enum):
    EMPTY = "empty"
    FIXED_FIELD = "fixed_field"


@dataclass(frozen=True)
class BlockPartition:
    """Disjoint rectangular blocks covering the lattice, with a border policy."""

    lattice: LatticeSpec
    blocks: tuple[Rect, ...]
    border_mode: BorderMode = BorderMode.EMPTY

    def __post_init__(self):
        covered = set()
        for b in self.blocks:
            if b.height < 1 or b.width < 1:
                raise ValueError("blocks must be non-empty rectangles")
            if not (
                self.lattice.contains(b.row0, b.col0)
                and self.lattice.contains(b.row0 + b.height - 1, b.col0 + b.width - 1)
            ):
                raise ValueError(f"block {b} exceeds the lattice")
            sites = b.sites(self.lattice)
            if covered.intersection(sites):
                raise ValueError("blocks overlap")
            covered.update(sites)
        if len(covered) != self.lattice.n:
            raise ValueError("blocks do not cover the lattice")


def neighbors(lattice: LatticeSpec, system: NeighborhoodSystem, i: int) -> list[int]:
    """Adjacent site indices of site i, sorted ascending (free boundary)."""
    if not 0 <= i < lattice.n:
        raise IndexError(f"site index {i} out of range for {lattice.n} sites")
    row, col = lattice.coords(i)
    out = [
        lattice.site(row + dr, col + dc)
        for dr, dc in system.offsets
        if lattice.contains(row + dr, col + dc)
    ]
    out.sort()
    return out


def regular_partition(
    lattice: LatticeSpec, b: int, border_mode: BorderMode = BorderMode.EMPTY
) -> BlockPartition:
    """Tile the lattice with b-by-b blocks row-major; trailing blocks may be ragged."""
    if b < 1:
        raise ValueError("block size must be positive")
    blocks = []
    for r0 in range(0, lattice.height, b):
        for c0 in range(0, lattice.width, b):
            blocks.append(
                Rect(r0, c0, min(b, lattice.height - r0), min(b, lattice.width - c0))
            )
    return BlockPartition(lattice, tuple(blocks), border_mode)


def block_border(
    partition: BlockPartition, block_index: int, system: NeighborhoodSystem
) -> list[int]:
    """Sites outside the block adjacent to it, sorted; [] when borders are disabled."""
    if not 0 <= block_index < len(partition.blocks):
        raise IndexError(f"block index {block_index} out of range")
    if partition.border_mode is BorderMode.EMPTY:
        return []
    return list(_border_sites(partition.lattice, partition.blocks[block_index], system))


@lru_cache(maxsize=4096)
def _border_sites(
    lattice: LatticeSpec, block: Rect, system: NeighborhoodSystem
) -> tuple[int, ...]:
    border = set()
    for r in range(block.row0, block.row0 + block.height):
        for c in range(block.col0, block.col0 + block.width):
            for dr, dc in system.offsets:
                rr, cc = r + dr, c + dc
                if lattice.contains(rr, cc) and not block.contains_site(rr, cc):
                    border.add(lattice.site(rr, cc))
    return tuple(sorted(border))


def edge_count(lattice: LatticeSpec, system: NeighborhoodSystem) -> int:
    """Number of undirected edges of the adjacency graph."""
    h, w = lattice.height, lattice.width
    rook = h * (w - 1) + w * (h - 1)
    if system is NeighborhoodSystem.G4:
        return rook
    return rook + 2 * (h - 1) * (w - 1)
