"""Flat `key = value` configuration files and experiment settings."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .grid import NeighborhoodSystem
from .potts import MESSAGE_BITS


class ConfigError(Exception):
    """Invalid configuration file or option values."""


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat key = value lines; `#` starts a comment; later keys override."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}, line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}, line {lineno}: empty key")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return parse_config_text(text, source=str(path))


def get_int(mapping, key, default=None) -> int:
    raw = _raw(mapping, key, default)
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected an integer, got {raw!r}")


def get_float(mapping, key, default=None) -> float:
    raw = _raw(mapping, key, default)
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {raw!r}")


def get_str(mapping, key, default=None) -> str:
    return str(_raw(mapping, key, default))


def get_system(mapping, key, default=None) -> NeighborhoodSystem:
    raw = _raw(mapping, key, default)
    try:
        return NeighborhoodSystem(str(raw))
    except ValueError:
        raise ConfigError(f"{key}: expected G4 or G8, got {raw!r}")


def get_system_list(mapping, key, default=None) -> tuple[NeighborhoodSystem, ...]:
    raw = _raw(mapping, key, default)
    systems = []
    for token in str(raw).split(","):
        token = token.strip()
        if not token:
            continue
        try:
            systems.append(NeighborhoodSystem(token))
        except ValueError:
            raise ConfigError(f"{key}: expected G4 or G8, got {token!r}")
    if not systems:
        raise ConfigError(f"{key}: empty system list")
    return tuple(systems)


def _raw(mapping, key, default):
    if key in mapping:
        return mapping[key]
    if default is None:
        raise ConfigError(f"missing required key {key!r}")
    return default


@dataclass(frozen=True)
class CriterionSpec:
    """How one criterion is evaluated: block size, border source, parameter source."""

    name: str
    block_size: int
    border_source: str  # "none", "icm", or "em"
    theta_source: str  # "icm" or "em"


def parse_criterion(token: str) -> CriterionSpec:
    token = token.strip()
    if token == "PLIC":
        return CriterionSpec("PLIC", 1, "icm", "icm")
    if token == "BIC_MF":
        return CriterionSpec("BIC_MF", 1, "em", "em")
    match = re.fullmatch(r"BLIC_(\d+)x(\d+)", token)
    if match:
        b1, b2 = int(match.group(1)), int(match.group(2))
        if b1 != b2 or b1 < 1:
            raise ConfigError(f"criterion {token!r}: blocks must be square")
        return CriterionSpec(f"BLIC_{b1}x{b1}", b1, "none", "em")
    match = re.fullmatch(r"BLIC_MF_(\d+)x(\d+)", token)
    if match:
        b1, b2 = int(match.group(1)), int(match.group(2))
        if b1 != b2 or b1 < 1:
            raise ConfigError(f"criterion {token!r}: blocks must be square")
        return CriterionSpec(f"BLIC_MF_{b1}x{b1}", b1, "em", "em")
    raise ConfigError(
        f"unknown criterion {token!r}; expected PLIC, BIC_MF, BLIC_<b>x<b>, "
        "or BLIC_MF_<b>x<b>"
    )


def parse_criteria(raw: str) -> tuple[CriterionSpec, ...]:
    specs = tuple(
        parse_criterion(token) for token in str(raw).split(",") if token.strip()
    )
    if not specs:
        raise ConfigError("criteria: empty list")
    if len({s.name for s in specs}) != len(specs):
        raise ConfigError("criteria: duplicate names")
    return specs


_KNOWN_KEYS = {
    "height", "width", "true_system", "true_K", "true_interaction", "sigma",
    "K_min", "K_max", "systems", "criteria", "replicates", "em_iterations",
    "icm_iterations", "burnin", "seed", "out", "threads",
    "table_size", "test_size", "knn_k", "prior_g4_max", "prior_g8_max",
}

_REQUIRED = {
    "exp1": (
        "height", "width", "true_system", "true_K", "true_interaction",
        "sigma", "K_min", "K_max", "criteria", "replicates", "seed",
    ),
    "exp2": (
        "height", "width", "true_system", "true_K", "true_interaction",
        "sigma", "systems", "criteria", "replicates", "seed",
    ),
    "exp3": (
        "height", "width", "sigma", "criteria", "table_size", "test_size",
        "knn_k", "seed",
    ),
}


@dataclass
class ExperimentConfig:
    height: int
    width: int
    sigma: float
    criteria: tuple[CriterionSpec, ...]
    seed: int
    true_system: NeighborhoodSystem = NeighborhoodSystem.G4
    true_K: int = 2
    true_interaction: float = 0.0
    K_min: int = 2
    K_max: int = 2
    systems: tuple[NeighborhoodSystem, ...] = (NeighborhoodSystem.G4,)
    replicates: int = 1
    em_iterations: int = 200
    icm_iterations: int = 200
    burnin: int = 200
    out: str = "runs"
    threads: int = 1
    table_size: int = 5000
    test_size: int = 200
    knn_k: int = 100
    prior_g4_max: float = 1.0
    prior_g8_max: float = 0.35

    @classmethod
    def from_mapping(cls, mapping: dict[str, str], kind: str) -> "ExperimentConfig":
        if kind not in _REQUIRED:
            raise ValueError(f"unknown experiment kind {kind!r}")
        unknown = set(mapping) - _KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        missing = [k for k in _REQUIRED[kind] if k not in mapping]
        if missing:
            raise ConfigError(f"missing required keys: {', '.join(missing)}")
        cfg = cls(
            height=get_int(mapping, "height"),
            width=get_int(mapping, "width"),
            sigma=get_float(mapping, "sigma"),
            criteria=parse_criteria(get_str(mapping, "criteria")),
            seed=get_int(mapping, "seed"),
            true_system=get_system(mapping, "true_system", "G4"),
            true_K=get_int(mapping, "true_K", "2"),
            true_interaction=get_float(mapping, "true_interaction", "0"),
            K_min=get_int(mapping, "K_min", mapping.get("true_K", "2")),
            K_max=get_int(mapping, "K_max", mapping.get("true_K", "2")),
            systems=get_system_list(mapping, "systems", "G4"),
            replicates=get_int(mapping, "replicates", "1"),
            em_iterations=get_int(mapping, "em_iterations", "200"),
            icm_iterations=get_int(mapping, "icm_iterations", "200"),
            burnin=get_int(mapping, "burnin", "200"),
            out=get_str(mapping, "out", "runs"),
            threads=get_int(mapping, "threads", "1"),
            table_size=get_int(mapping, "table_size", "5000"),
            test_size=get_int(mapping, "test_size", "200"),
            knn_k=get_int(mapping, "knn_k", "100"),
            prior_g4_max=get_float(mapping, "prior_g4_max", "1.0"),
            prior_g8_max=get_float(mapping, "prior_g8_max", "0.35"),
        )
        cfg.validate(kind)
        return cfg

    def validate(self, kind: str) -> None:
        if self.height < 1 or self.width < 1:
            raise ConfigError("lattice dimensions must be positive")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if self.K_min < 2:
            raise ConfigError("K_min must be at least 2")
        if self.K_max < self.K_min:
            raise ConfigError("K_max must be at least K_min")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.burnin < 1:
            raise ConfigError("burnin must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if kind == "exp1":
            if not self.K_min <= self.true_K <= self.K_max:
                raise ConfigError("true_K must lie in [K_min, K_max]")
        if kind == "exp2" and len(self.systems) < 1:
            raise ConfigError("systems must name at least one adjacency system")
        if kind == "exp3":
            if self.table_size < 1 or self.test_size < 1:
                raise ConfigError("table_size and test_size must be positive")
            if not 1 <= self.knn_k <= self.table_size:
                raise ConfigError("knn_k must be in [1, table_size]")
            if self.prior_g4_max <= 0 or self.prior_g8_max <= 0:
                raise ConfigError("prior upper bounds must be positive")
        k_top = self.K_max if kind != "exp3" else 2
        diagonal = NeighborhoodSystem.G8 in self.systems or (
            self.true_system is NeighborhoodSystem.G8 or kind == "exp3"
        )
        for spec in self.criteria:
            lag = min(spec.block_size, self.height, self.width) + (1 if diagonal else 0)
            if lag * math.log2(k_top) > MESSAGE_BITS:
                raise ConfigError(
                    f"criterion {spec.name}: block size {spec.block_size} exceeds "
                    f"the recursion bound at K = {k_top}"
                )
        if kind in ("exp1", "exp2"):
            needs = {s.border_source for s in self.criteria}
            needs |= {s.theta_source for s in self.criteria}
            if "icm" in needs and self.icm_iterations < 1:
                raise ConfigError("icm_iterations must be at least 1")
            if "em" in needs and self.em_iterations < 1:
                raise ConfigError("em_iterations must be at least 1")
