"""Gaussian emission model: densities, marginal MAP segmentation, error analytics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

SD_FLOOR = 1e-3


@dataclass(frozen=True, eq=False)
class EmissionParams:
    """Per-color Gaussian components (mean, standard deviation), means ascending."""

    means: np.ndarray  # (K,)
    sds: np.ndarray  # (K,)

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        sds = np.asarray(self.sds, dtype=float)
        if means.ndim != 1 or means.shape != sds.shape:
            raise ValueError("means and sds must be 1-d arrays of equal length")
        if len(means) < 2:
            raise ValueError("need at least two components")
        if np.any(sds <= 0):
            raise ValueError("standard deviations must be positive")
        if np.any(np.diff(means) < 0):
            raise ValueError("means must be sorted ascending")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)

    @property
    def K(self) -> int:
        return len(self.means)

    @classmethod
    def default(cls, K: int, sigma: float) -> "EmissionParams":
        """Components centered at 0..K-1 with a common standard deviation."""
        return cls(np.arange(K, dtype=float), np.full(K, float(sigma)))


@dataclass(frozen=True)
class HiddenPottsParams:
    """Full parameter set of a hidden Potts model: emission plus interaction."""

    emission: EmissionParams
    interaction: float


def log_emission(y, k: int, params: EmissionParams):
    """Gaussian log density of observation(s) y under component k."""
    if not 0 <= k < params.K:
        raise IndexError(f"component {k} out of range")
    mu, sd = params.means[k], params.sds[k]
    y = np.asarray(y, dtype=float)
    out = -0.5 * np.log(2.0 * np.pi * sd**2) - (y - mu) ** 2 / (2.0 * sd**2)
    return float(out) if out.ndim == 0 else out


def log_emission_table(y: np.ndarray, params: EmissionParams) -> np.ndarray:
    """Log densities for every component, shape y.shape + (K,)."""
    y = np.asarray(y, dtype=float)
    mu = params.means
    sd = params.sds
    return -0.5 * np.log(2.0 * np.pi * sd**2) - (y[..., None] - mu) ** 2 / (2.0 * sd**2)


def marginal_map(y: np.ndarray, params: EmissionParams) -> np.ndarray:
    """Per-site most likely component; ties go to the smallest index."""
    return np.argmax(log_emission_table(y, params), axis=-1)


def sample_emission(x: np.ndarray, params: EmissionParams, rng: np.random.Generator) -> np.ndarray:
    """Independent per-site Gaussian draws conditioned on the color field x."""
    x = np.asarray(x)
    if x.size and (x.min() < 0 or x.max() >= params.K):
        raise ValueError("colors out of range for the emission components")
    return rng.normal(params.means[x], params.sds[x])


def misclassification_rate(params: EmissionParams) -> float:
    """Marginal-MAP error probability under uniform latent colors, equal sds.

    With equal standard deviations the MAP rule thresholds at the midpoints
    between consecutive means, which gives a closed form.
    """
    sds = params.sds
    if not np.allclose(sds, sds[0]):
        raise ValueError("closed form requires equal standard deviations")
    mu = params.means
    sd = sds[0]
    lo = np.concatenate(([-np.inf], (mu[:-1] + mu[1:]) / 2.0))
    hi = np.concatenate(((mu[:-1] + mu[1:]) / 2.0, [np.inf]))
    err = norm.cdf((lo - mu) / sd) + norm.sf((hi - mu) / sd)
    return float(err.mean())
