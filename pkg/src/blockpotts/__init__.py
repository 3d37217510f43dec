"""Model selection for hidden Potts random fields via block likelihood criteria."""

from .abc import (
    ReferenceTable,
    build_table,
    default_priors,
    knn_classify,
    prior_error_rate,
    summary_2d,
)
from .config import ConfigError, CriterionSpec, ExperimentConfig, parse_criterion
from .criteria import (
    CandidateModel,
    CriterionValue,
    bic_mf_like,
    blic,
    block_incomplete_loglik,
    delta_curve,
    parameter_count,
    plic,
    select_model,
)
from .fit import FitResult, fit_interaction, icm_fit, kmeans_init, simulated_field_em
from .grid import (
    BlockPartition,
    BorderMode,
    LatticeSpec,
    NeighborhoodSystem,
    Rect,
    block_border,
    edge_count,
    neighbors,
    regular_partition,
)
from .noise import (
    EmissionParams,
    HiddenPottsParams,
    log_emission,
    log_emission_table,
    marginal_map,
    misclassification_rate,
    sample_emission,
)
from .potts import (
    BorderCondition,
    PottsSpec,
    SitePotentials,
    conditioned_statistic,
    partition_function_bruteforce,
    partition_function_recursive,
    sufficient_statistic,
)
from .samplers import (
    ChainState,
    gibbs_sweep,
    initial_state,
    simulate_hidden,
    swendsen_wang_step,
)
from .experiments import (
    SelectionTable,
    run_experiment1,
    run_experiment2,
    run_experiment3,
)

__version__ = "0.1.0"

__all__ = [
    "BlockPartition",
    "BorderCondition",
    "BorderMode",
    "CandidateModel",
    "ChainState",
    "ConfigError",
    "CriterionSpec",
    "CriterionValue",
    "EmissionParams",
    "ExperimentConfig",
    "FitResult",
    "HiddenPottsParams",
    "LatticeSpec",
    "NeighborhoodSystem",
    "PottsSpec",
    "Rect",
    "ReferenceTable",
    "SelectionTable",
    "SitePotentials",
    "bic_mf_like",
    "blic",
    "block_border",
    "block_incomplete_loglik",
    "build_table",
    "conditioned_statistic",
    "default_priors",
    "delta_curve",
    "edge_count",
    "fit_interaction",
    "gibbs_sweep",
    "icm_fit",
    "initial_state",
    "kmeans_init",
    "knn_classify",
    "log_emission",
    "log_emission_table",
    "marginal_map",
    "misclassification_rate",
    "neighbors",
    "parameter_count",
    "parse_criterion",
    "partition_function_bruteforce",
    "partition_function_recursive",
    "plic",
    "prior_error_rate",
    "regular_partition",
    "run_experiment1",
    "run_experiment2",
    "run_experiment3",
    "sample_emission",
    "select_model",
    "simulate_hidden",
    "simulated_field_em",
    "sufficient_statistic",
    "summary_2d",
    "swendsen_wang_step",
]
