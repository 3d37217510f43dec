"""Parameter estimation and segmentation: K-means init, ICM, simulated-field EM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from ._kernels import icm_sweep_kernel
from .grid import LatticeSpec, NeighborhoodSystem
from .noise import SD_FLOOR, EmissionParams, HiddenPottsParams, log_emission_table
from .potts import PottsSpec
from .samplers import ChainState, gibbs_sweep

INTERACTION_MAX = 3.0
DEFAULT_ITERATIONS = 200
DEFAULT_INITIAL_INTERACTION = 0.5


@dataclass
class FitResult:
    theta: HiddenPottsParams
    segmentation: np.ndarray
    iterations: int
    method: str  # "ICM" or "SimulatedField"


def kmeans_init(y: np.ndarray, K: int) -> tuple[np.ndarray, EmissionParams]:
    """Lloyd's algorithm on the scalar observations with quantile-seeded centers.

    Deterministic: center k starts at the (k+0.5)/K sample quantile; at most
    50 iterations; centers are sorted ascending before relabeling.
    """
    if K < 2:
        raise ValueError("need at least two clusters")
    flat = np.asarray(y, dtype=float).ravel()
    if len(np.unique(flat)) < K:
        raise ValueError(f"need at least {K} distinct values")
    centers = np.quantile(flat, (np.arange(K) + 0.5) / K)
    labels = np.argmin(np.abs(flat[:, None] - centers[None, :]), axis=1)
    for _ in range(50):
        for k in range(K):
            members = flat[labels == k]
            if len(members):
                centers[k] = members.mean()
        new_labels = np.argmin(np.abs(flat[:, None] - centers[None, :]), axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    order = np.argsort(centers, kind="stable")
    centers = centers[order]
    labels = np.argsort(order, kind="stable")[labels]
    sds = np.empty(K)
    for k in range(K):
        members = flat[labels == k]
        sds[k] = members.std() if len(members) else 0.0
    sds = np.maximum(sds, SD_FLOOR)
    return labels.reshape(np.asarray(y).shape), EmissionParams(centers, sds)


def neighbor_color_counts(
    field: np.ndarray, K: int, system: NeighborhoodSystem
) -> np.ndarray:
    """Per site, how many neighbors carry each color; shape (h, w, K)."""
    field = np.asarray(field)
    h, w = field.shape
    onehot = np.zeros((h, w, K))
    onehot[np.arange(h)[:, None], np.arange(w)[None, :], field] = 1.0
    counts = np.zeros((h, w, K))
    for dr, dc in system.offsets:
        rs = slice(max(dr, 0), h + min(dr, 0))
        cs = slice(max(dc, 0), w + min(dc, 0))
        rd = slice(max(-dr, 0), h + min(-dr, 0))
        cd = slice(max(-dc, 0), w + min(-dc, 0))
        counts[rd, cd] += onehot[rs, cs]
    return counts


def interaction_objective(
    interaction: float, counts: np.ndarray, weights: np.ndarray
) -> float:
    """sum_ik W_ik * psi * V_ik - sum_i (sum_k W_ik) * log sum_k' exp(psi * V_ik').

    Concave in the interaction; the pseudolikelihood of a labeling is the
    special case where the weights are one-hot.
    """
    lse = logsumexp(interaction * counts, axis=-1)
    return float(
        interaction * np.sum(weights * counts) - np.sum(weights.sum(axis=-1) * lse)
    )


def _interaction_gradient(interaction, counts, weights):
    probs = np.exp(
        interaction * counts - logsumexp(interaction * counts, axis=-1, keepdims=True)
    )
    expected = np.sum(weights.sum(axis=-1, keepdims=True) * probs * counts)
    return float(np.sum(weights * counts) - expected)


def fit_interaction(
    counts: np.ndarray, weights: np.ndarray, lo: float = 0.0, hi: float = INTERACTION_MAX
) -> float:
    """Maximizer of interaction_objective over [lo, hi] via its root condition."""
    g_lo = _interaction_gradient(lo, counts, weights)
    if g_lo <= 0:
        return lo
    g_hi = _interaction_gradient(hi, counts, weights)
    if g_hi >= 0:
        return hi
    return float(
        brentq(lambda p: _interaction_gradient(p, counts, weights), lo, hi, xtol=1e-10)
    )


def _hard_emission(y: np.ndarray, labels: np.ndarray, K: int) -> EmissionParams:
    """Cluster means and sds from hard assignments; empty clusters re-seeded."""
    flat_y = np.asarray(y, dtype=float).ravel()
    flat_l = np.asarray(labels).ravel()
    means = np.empty(K)
    sds = np.empty(K)
    global_sd = max(flat_y.std(), SD_FLOOR)
    for k in range(K):
        members = flat_y[flat_l == k]
        if len(members):
            means[k] = members.mean()
            sds[k] = max(members.std(), SD_FLOOR)
        else:
            means[k] = np.quantile(flat_y, (k + 0.5) / K)
            sds[k] = global_sd
    return EmissionParams(*_sorted_components(means, sds)[:2])


def _sorted_components(means, sds):
    order = np.argsort(means, kind="stable")
    return means[order], sds[order], np.argsort(order, kind="stable")


def icm_fit(
    y: np.ndarray,
    lattice: LatticeSpec,
    system: NeighborhoodSystem,
    K: int,
    init: tuple[np.ndarray, EmissionParams] | None = None,
    max_sweeps: int = 10,
    iterations: int = DEFAULT_ITERATIONS,
) -> FitResult:
    """Unsupervised iterated conditional modes.

    Alternates greedy raster sweeps (until the segmentation is stable or
    max_sweeps is hit) with hard parameter updates; the interaction is the
    pseudolikelihood maximizer over [0, 3].  Stops early only at an exact
    fixed point, where further rounds provably change nothing.
    """
    y = np.asarray(y, dtype=float)
    labels, emission = init if init is not None else kmeans_init(y, K)
    labels = np.ascontiguousarray(labels, dtype=np.int64).copy()
    interaction = DEFAULT_INITIAL_INTERACTION
    done = 0
    for _ in range(iterations):
        prev_labels = labels.copy()
        prev_params = (emission.means.copy(), emission.sds.copy(), interaction)
        pot = np.ascontiguousarray(log_emission_table(y, emission))
        for _ in range(max_sweeps):
            changed = icm_sweep_kernel(
                labels, interaction, pot, K, system is NeighborhoodSystem.G8
            )
            if changed == 0:
                break
        emission = _hard_emission(y, labels, K)
        counts = neighbor_color_counts(labels, K, system)
        onehot = np.zeros_like(counts)
        onehot[np.arange(lattice.height)[:, None], np.arange(lattice.width)[None, :], labels] = 1.0
        interaction = fit_interaction(counts, onehot)
        done += 1
        if (
            np.array_equal(labels, prev_labels)
            and np.array_equal(emission.means, prev_params[0])
            and np.array_equal(emission.sds, prev_params[1])
            and interaction == prev_params[2]
        ):
            break
    theta = HiddenPottsParams(emission, interaction)
    return FitResult(theta, labels, done, "ICM")


def simulated_field_em(
    y: np.ndarray,
    lattice: LatticeSpec,
    system: NeighborhoodSystem,
    K: int,
    rng: np.random.Generator,
    init: tuple[np.ndarray, EmissionParams] | None = None,
    iterations: int = DEFAULT_ITERATIONS,
) -> FitResult:
    """EM-like estimation that refreshes the reference field by a posterior sweep.

    Per iteration: draw the field by one Gibbs sweep of the posterior at the
    current parameters; form per-site responsibilities from emission plus
    neighbor-count terms; update the Gaussian components by weighted moments
    and the interaction by the concave 1-d maximizer.  Components are kept
    sorted by mean after every update; a fixed number of iterations is run.
    """
    y = np.asarray(y, dtype=float)
    labels, emission = init if init is not None else kmeans_init(y, K)
    field = np.ascontiguousarray(labels, dtype=np.int64)
    interaction = DEFAULT_INITIAL_INTERACTION
    flat_y = y.ravel()
    for _ in range(iterations):
        spec = PottsSpec(lattice, system, K, interaction)
        emit_logp = log_emission_table(y, emission)
        state = gibbs_sweep(ChainState(field, 0, rng), spec, emit_logp.reshape(-1, K))
        field = state.field
        counts = neighbor_color_counts(field, K, system)
        logits = emit_logp + interaction * counts
        resp = np.exp(logits - logsumexp(logits, axis=-1, keepdims=True))
        flat_r = resp.reshape(-1, K)
        mass = flat_r.sum(axis=0)
        means = np.empty(K)
        sds = np.empty(K)
        global_sd = max(flat_y.std(), SD_FLOOR)
        for k in range(K):
            if mass[k] < 1e-8:
                means[k] = np.quantile(flat_y, (k + 0.5) / K)
                sds[k] = global_sd
            else:
                means[k] = np.dot(flat_r[:, k], flat_y) / mass[k]
                var = np.dot(flat_r[:, k], (flat_y - means[k]) ** 2) / mass[k]
                sds[k] = max(np.sqrt(var), SD_FLOOR)
        interaction = fit_interaction(counts, resp)
        means, sds, relabel = _sorted_components(means, sds)
        emission = EmissionParams(means, sds)
        field = relabel[field]
    theta = HiddenPottsParams(emission, interaction)
    return FitResult(theta, field, iterations, "SimulatedField")
