"""Simulation-based model choice: reference tables, 2-d summaries, k-NN error."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .criteria import CandidateModel
from .grid import LatticeSpec, NeighborhoodSystem, edge_count
from .noise import EmissionParams, marginal_map, sample_emission
from .potts import PottsSpec, sufficient_statistic
from .samplers import initial_state, swendsen_wang_step

REFERENCE_TABLE_HEADER = ("model", "psi", "s_g4", "s_g8")

# Uniform interaction ranges used when comparing the two adjacency systems.
DEFAULT_PRIOR_G4 = (0.0, 1.0)
DEFAULT_PRIOR_G8 = (0.0, 0.35)


def default_priors(K: int = 2) -> dict[CandidateModel, tuple[float, float]]:
    return {
        CandidateModel(NeighborhoodSystem.G4, K): DEFAULT_PRIOR_G4,
        CandidateModel(NeighborhoodSystem.G8, K): DEFAULT_PRIOR_G8,
    }


@dataclass
class ReferenceTable:
    """Simulated (model, interaction, summary) rows plus the priors that made them."""

    models: tuple[CandidateModel, ...]
    psis: np.ndarray
    summaries: np.ndarray  # (size, d)
    priors: dict[CandidateModel, tuple[float, float]] | None = None

    def __post_init__(self):
        self.psis = np.asarray(self.psis, dtype=float)
        self.summaries = np.asarray(self.summaries, dtype=float)
        size = len(self.models)
        if self.psis.shape != (size,) or self.summaries.ndim != 2:
            raise ValueError("rows must line up: one psi and one summary per model")
        if self.summaries.shape[0] != size:
            raise ValueError("rows must line up: one psi and one summary per model")
        if self.priors is not None:
            for m, psi in zip(self.models, self.psis):
                lo, hi = self.priors[m]
                if not lo <= psi <= hi:
                    raise ValueError(f"interaction {psi} outside the prior for {m.label}")

    @property
    def size(self) -> int:
        return len(self.models)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(REFERENCE_TABLE_HEADER)
            for m, psi, row in zip(self.models, self.psis, self.summaries):
                writer.writerow([m.system.value, repr(float(psi))]
                                + [repr(float(v)) for v in row])

    @classmethod
    def read_csv(cls, path, K: int = 2) -> "ReferenceTable":
        models = []
        psis = []
        summaries = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != REFERENCE_TABLE_HEADER:
                raise ValueError(f"unexpected header {header} in {path}")
            for row in reader:
                models.append(CandidateModel(NeighborhoodSystem(row[0]), K))
                psis.append(float(row[1]))
                summaries.append([float(v) for v in row[2:]])
        return cls(tuple(models), np.array(psis), np.array(summaries))


def summary_2d(y: np.ndarray, phi_ref: EmissionParams) -> tuple[float, float]:
    """Edge-normalized monochromatic-edge counts of the thresholded field.

    The field is segmented by the marginal MAP rule under phi_ref, then the
    matching-edge statistic is computed under both adjacency systems, each
    divided by its edge count.
    """
    y = np.asarray(y, dtype=float)
    lattice = LatticeSpec(*y.shape)
    x_hat = marginal_map(y, phi_ref)
    return tuple(
        sufficient_statistic(x_hat, lattice, system) / edge_count(lattice, system)
        for system in (NeighborhoodSystem.G4, NeighborhoodSystem.G8)
    )


def simulate_table_row(
    priors: dict[CandidateModel, tuple[float, float]],
    lattice: LatticeSpec,
    phi: EmissionParams,
    burnin: int,
    rng: np.random.Generator,
) -> tuple[CandidateModel, float, np.ndarray, tuple[float, float]]:
    """One reference-table row: model ~ uniform, interaction ~ prior, then simulate.

    Returns the simulated observations alongside the summary so callers can
    run further classifiers on the same realization.
    """
    model_list = sorted(priors, key=lambda m: (m.system.value, m.K))
    model = model_list[rng.integers(len(model_list))]
    lo, hi = priors[model]
    psi = float(rng.uniform(lo, hi))
    spec = PottsSpec(lattice, model.system, model.K, psi)
    state = initial_state(spec, rng)
    for _ in range(burnin):
        state = swendsen_wang_step(state, spec)
    y = sample_emission(state.field, phi, rng)
    return model, psi, y, summary_2d(y, phi)


def build_table(
    size: int,
    priors: dict[CandidateModel, tuple[float, float]],
    lattice: LatticeSpec,
    phi: EmissionParams,
    burnin: int,
    rng: np.random.Generator,
) -> ReferenceTable:
    """Simulate a reference table; each row gets its own spawned generator."""
    if size < 1:
        raise ValueError("table size must be at least 1")
    models = []
    psis = np.empty(size)
    summaries = np.empty((size, 2))
    for i, child in enumerate(rng.spawn(size)):
        model, psi, _, summary = simulate_table_row(priors, lattice, phi, burnin, child)
        models.append(model)
        psis[i] = psi
        summaries[i] = summary
    return ReferenceTable(tuple(models), psis, summaries, dict(priors))


def _standardize(table: ReferenceTable, queries: np.ndarray):
    center = table.summaries.mean(axis=0)
    scale = table.summaries.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return (table.summaries - center) / scale, (queries - center) / scale


def knn_classify(
    table: ReferenceTable, observed_summary, k: int
) -> CandidateModel:
    """Majority model label among the k nearest standardized summaries."""
    if table.size == 0:
        raise ValueError("empty reference table")
    if not 1 <= k <= table.size:
        raise ValueError(f"k must be in [1, {table.size}]")
    query = np.asarray(observed_summary, dtype=float)
    ref, q = _standardize(table, query[None, :])
    dist = np.linalg.norm(ref - q, axis=1)
    nearest = np.argsort(dist, kind="stable")[:k]
    counts: dict[CandidateModel, int] = {}
    for i in nearest:
        m = table.models[i]
        counts[m] = counts.get(m, 0) + 1
    best = max(counts.values())
    tied = [m for m, c in counts.items() if c == best]
    return min(
        tied, key=lambda m: (0 if m.system is NeighborhoodSystem.G4 else 1, m.K)
    )


def prior_error_rate(table: ReferenceTable, test_set: ReferenceTable, k: int) -> float:
    """Misclassification frequency of the k-NN rule over held-out simulations."""
    if test_set.size == 0:
        raise ValueError("empty test set")
    wrong = sum(
        knn_classify(table, test_set.summaries[i], k) != test_set.models[i]
        for i in range(test_set.size)
    )
    return wrong / test_set.size
