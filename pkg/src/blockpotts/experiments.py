"""Seeded experiment drivers: color-count recovery, adjacency choice, ABC baseline.

Replicates run in parallel on spawned seeds and are written back in replicate
order, so outputs are byte-identical for any thread count.
"""

from __future__ import annotations

import csv
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .abc import build_table, knn_classify, simulate_table_row
from .config import ExperimentConfig
from .criteria import (
    CandidateModel,
    CriterionValue,
    bic_mf_like,
    blic,
    delta_curve,
    plic,
    select_model,
)
from .fit import icm_fit, kmeans_init, simulated_field_em
from .grid import LatticeSpec, NeighborhoodSystem
from .noise import EmissionParams
from .potts import PottsSpec
from .samplers import simulate_hidden

CRITERIA_HEADER = ("replicate", "criterion", "G", "K", "value", "d_m", "loglik")
SELECTION_HEADER = ("criterion", "G", "K", "count")
DELTA_HEADER = ("replicate", "criterion", "G", "K", "delta")
ABC_REPORT_HEADER = ("method", "errors", "tests", "error_rate")


class ExperimentError(RuntimeError):
    """One or more replicates failed; completed results were still written."""


@dataclass
class SelectionTable:
    """How often each criterion picked each candidate, over the replicates."""

    criteria: tuple[str, ...]
    candidates: tuple[CandidateModel, ...]
    counts: dict[str, dict[CandidateModel, int]]
    replicates: int

    def __post_init__(self):
        for name in self.criteria:
            total = sum(self.counts[name].values())
            if total != self.replicates:
                raise ValueError(
                    f"criterion {name}: counts sum to {total}, "
                    f"expected {self.replicates}"
                )

    def count(self, criterion: str, candidate: CandidateModel) -> int:
        return self.counts[criterion].get(candidate, 0)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SELECTION_HEADER)
            for name in self.criteria:
                for cand in self.candidates:
                    writer.writerow(
                        [name, cand.system.value, cand.K, self.count(name, cand)]
                    )


def _sorted_candidates(models) -> tuple[CandidateModel, ...]:
    return tuple(sorted(models, key=lambda m: (m.system.value, m.K)))


def _experiment_candidates(config: ExperimentConfig, kind: str):
    ks = range(config.K_min, config.K_max + 1)
    if kind == "exp1":
        return _sorted_candidates(CandidateModel(config.true_system, k) for k in ks)
    return _sorted_candidates(
        CandidateModel(system, k) for system in set(config.systems) for k in ks
    )


def _exp3_priors(config: ExperimentConfig) -> dict[CandidateModel, tuple[float, float]]:
    return {
        CandidateModel(NeighborhoodSystem.G4, 2): (0.0, config.prior_g4_max),
        CandidateModel(NeighborhoodSystem.G8, 2): (0.0, config.prior_g8_max),
    }


def evaluate_criterion(spec, y, model, icm_res, em_res) -> CriterionValue:
    """One configured criterion on one candidate, given the fits it needs."""
    if spec.name == "PLIC":
        return plic(y, model, icm_res)
    if spec.name == "BIC_MF":
        return bic_mf_like(y, model, em_res)
    source = icm_res if spec.theta_source == "icm" else em_res
    border = None
    if spec.border_source == "icm":
        border = icm_res.segmentation
    elif spec.border_source == "em":
        border = em_res.segmentation
    return blic(
        y, spec.block_size, source.theta, model, border_field=border, name=spec.name
    )


def fit_and_score(
    y: np.ndarray,
    candidates,
    config: ExperimentConfig,
    rng: np.random.Generator,
) -> list[CriterionValue]:
    """Fit every candidate and evaluate every configured criterion on it."""
    lattice = LatticeSpec(*y.shape)
    needs = {c.border_source for c in config.criteria}
    needs |= {c.theta_source for c in config.criteria}
    values: list[CriterionValue] = []
    children = rng.spawn(len(candidates))
    for model, child in zip(candidates, children):
        init = kmeans_init(y, model.K)
        icm_res = None
        em_res = None
        if "icm" in needs:
            icm_res = icm_fit(
                y, lattice, model.system, model.K,
                init=init, iterations=config.icm_iterations,
            )
        if "em" in needs:
            em_res = simulated_field_em(
                y, lattice, model.system, model.K, child,
                init=init, iterations=config.em_iterations,
            )
        for spec in config.criteria:
            values.append(evaluate_criterion(spec, y, model, icm_res, em_res))
    return values


def _selection_worker(args):
    config, kind, rep, seed_seq = args
    try:
        rng = np.random.default_rng(seed_seq)
        lattice = LatticeSpec(config.height, config.width)
        true_spec = PottsSpec(
            lattice, config.true_system, config.true_K, config.true_interaction
        )
        emission = EmissionParams.default(config.true_K, config.sigma)
        _, y = simulate_hidden(true_spec, emission, config.burnin, rng)
        candidates = _experiment_candidates(config, kind)
        values = fit_and_score(y, candidates, config, rng)
        return rep, values, None
    except Exception:
        return rep, None, traceback.format_exc()


def _exp3_worker(args):
    config, index, seed_seq = args
    try:
        rng = np.random.default_rng(seed_seq)
        lattice = LatticeSpec(config.height, config.width)
        phi = EmissionParams(
            np.array([0.0, 1.0]), np.array([config.sigma, config.sigma])
        )
        priors = _exp3_priors(config)
        model, _, y, summary = simulate_table_row(
            priors, lattice, phi, config.burnin, rng
        )
        candidates = _sorted_candidates(priors)
        values = fit_and_score(y, candidates, config, rng)
        chosen = {
            spec.name: select_model([v for v in values if v.name == spec.name])
            for spec in config.criteria
        }
        return index, model, summary, chosen, None
    except Exception:
        return index, None, None, None, traceback.format_exc()


def _map_jobs(worker, jobs, threads: int):
    if threads <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        return list(pool.map(worker, jobs))


def _report_failures(failures, label: str) -> None:
    for index, err in failures:
        print(f"{label} {index} failed:\n{err}", file=sys.stderr)


def _write_criteria_csv(path, results: dict[int, list[CriterionValue]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CRITERIA_HEADER)
        for rep in sorted(results):
            for v in results[rep]:
                writer.writerow([
                    rep, v.name, v.model.system.value, v.model.K,
                    repr(v.value), v.d_m, repr(v.block_loglik),
                ])


def _write_delta_csv(path, results, config: ExperimentConfig) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DELTA_HEADER)
        if config.K_max == config.K_min:
            return
        for rep in sorted(results):
            for spec in config.criteria:
                per_system: dict[NeighborhoodSystem, list[CriterionValue]] = {}
                for v in results[rep]:
                    if v.name == spec.name:
                        per_system.setdefault(v.model.system, []).append(v)
                for system in sorted(per_system, key=lambda s: s.value):
                    vals = sorted(per_system[system], key=lambda v: v.model.K)
                    for v, delta in zip(vals, delta_curve(vals)):
                        writer.writerow(
                            [rep, spec.name, system.value, v.model.K, repr(delta)]
                        )


def _run_selection(config: ExperimentConfig, kind: str) -> SelectionTable:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    candidates = _experiment_candidates(config, kind)
    children = np.random.SeedSequence(config.seed).spawn(config.replicates)
    jobs = [(config, kind, rep, children[rep]) for rep in range(config.replicates)]
    outcomes = _map_jobs(_selection_worker, jobs, config.threads)

    results: dict[int, list[CriterionValue]] = {}
    failures = []
    for rep, values, err in outcomes:
        if err is None:
            results[rep] = values
        else:
            failures.append((rep, err))

    names = tuple(spec.name for spec in config.criteria)
    counts: dict[str, dict[CandidateModel, int]] = {n: {} for n in names}
    for rep in sorted(results):
        for name in names:
            chosen = select_model([v for v in results[rep] if v.name == name])
            counts[name][chosen] = counts[name].get(chosen, 0) + 1
    table = SelectionTable(names, candidates, counts, len(results))

    table.write_csv(out / "selection.csv")
    _write_criteria_csv(out / "criteria.csv", results)
    _write_delta_csv(out / "delta.csv", results, config)
    _report_failures(failures, "replicate")
    if failures:
        raise ExperimentError(f"{len(failures)} of {config.replicates} replicates failed")
    return table


def run_experiment1(config: ExperimentConfig) -> SelectionTable:
    """Recover the number of colors on data from a known model; count selections."""
    return _run_selection(config, "exp1")


def run_experiment2(config: ExperimentConfig) -> SelectionTable:
    """Choose the adjacency system (optionally jointly with K); count selections."""
    return _run_selection(config, "exp2")


def run_experiment3(config: ExperimentConfig) -> dict[str, float]:
    """Prior error rates of the ABC classifier and of each configured criterion."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    lattice = LatticeSpec(config.height, config.width)
    phi = EmissionParams(np.array([0.0, 1.0]), np.array([config.sigma, config.sigma]))
    priors = _exp3_priors(config)
    table_seed, test_seed = np.random.SeedSequence(config.seed).spawn(2)

    table = build_table(
        config.table_size, priors, lattice, phi, config.burnin,
        np.random.default_rng(table_seed),
    )
    table.write_csv(out / "reference_table.csv")

    children = test_seed.spawn(config.test_size)
    jobs = [(config, i, children[i]) for i in range(config.test_size)]
    outcomes = _map_jobs(_exp3_worker, jobs, config.threads)

    tests = []
    failures = []
    for index, model, summary, chosen, err in outcomes:
        if err is None:
            tests.append((index, model, summary, chosen))
        else:
            failures.append((index, err))
    tests.sort()

    methods = ["ABC_2D"] + [spec.name for spec in config.criteria]
    errors = {name: 0 for name in methods}
    for _, model, summary, chosen in tests:
        if knn_classify(table, summary, config.knn_k) != model:
            errors["ABC_2D"] += 1
        for spec in config.criteria:
            if chosen[spec.name] != model:
                errors[spec.name] += 1
    total = len(tests)
    rates = {name: errors[name] / total if total else float("nan") for name in methods}

    with open(out / "abc_report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ABC_REPORT_HEADER)
        for name in methods:
            writer.writerow([name, errors[name], total, repr(rates[name])])
    _report_failures(failures, "test realization")
    if failures:
        raise ExperimentError(f"{len(failures)} of {config.test_size} tests failed")
    return rates
