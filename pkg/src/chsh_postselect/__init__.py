"""Exact CHSH statistics, post-selection-conditioned correlations, and
explicit local hidden-variable models for mixtures of product states."""

from .correlations import (
    ChshReport,
    ChshSettings,
    JointDistribution,
    chsh_combination,
    chsh_value,
    conditional_expectation,
    conditioned_chsh_value,
    expectation,
    joint_distribution,
    pair_distributions,
    pass_probability,
)
from .exceptions import (
    DegeneratePostSelectionError,
    DimensionMismatchError,
    NotHermitianError,
    OutcomeOutOfRangeError,
    ScenarioParseError,
    ScenarioValidationError,
)
from .lhv import (
    LhvModel,
    RandomVariable,
    SampleSpace,
    build_lhv_for_product_mixture,
    chsh_check_rvs,
    empirical_pair_distribution,
    lhv_marginal,
    lhv_pair_distribution,
    rv_conditional_expectation,
    rv_expectation,
    sample,
)
from .linalg import (
    SpectralDecomposition,
    hermitian_eigendecomposition,
    is_positive_semidefinite,
    tensor,
)
from .model import (
    COUNTEREXAMPLE_ANGLES,
    DensityMatrix,
    MixtureComponent,
    Povm,
    PovmOutcome,
    ProductMixture,
    PureState,
    density_from_mixture,
    povm_from_observable,
    spin1_counterexample_mixture,
    spin1_observable,
    validate_povm,
)
from .scan import RefineResult, ScanConfig, ScanResult, ScanRow, grid_scan, refine, rows_to_csv
from .scenario import Scenario, load_scenario, parse_scenario, save_scenario, scenario_to_dict

__all__ = [
    "ChshReport",
    "ChshSettings",
    "COUNTEREXAMPLE_ANGLES",
    "DegeneratePostSelectionError",
    "DensityMatrix",
    "DimensionMismatchError",
    "JointDistribution",
    "LhvModel",
    "MixtureComponent",
    "NotHermitianError",
    "OutcomeOutOfRangeError",
    "Povm",
    "PovmOutcome",
    "ProductMixture",
    "PureState",
    "RandomVariable",
    "RefineResult",
    "SampleSpace",
    "ScanConfig",
    "ScanResult",
    "ScanRow",
    "Scenario",
    "ScenarioParseError",
    "ScenarioValidationError",
    "SpectralDecomposition",
    "build_lhv_for_product_mixture",
    "chsh_check_rvs",
    "chsh_combination",
    "chsh_value",
    "conditional_expectation",
    "conditioned_chsh_value",
    "density_from_mixture",
    "empirical_pair_distribution",
    "expectation",
    "grid_scan",
    "hermitian_eigendecomposition",
    "is_positive_semidefinite",
    "joint_distribution",
    "lhv_marginal",
    "lhv_pair_distribution",
    "load_scenario",
    "pair_distributions",
    "parse_scenario",
    "pass_probability",
    "povm_from_observable",
    "refine",
    "rows_to_csv",
    "rv_conditional_expectation",
    "rv_expectation",
    "sample",
    "save_scenario",
    "scenario_to_dict",
    "spin1_counterexample_mixture",
    "spin1_observable",
    "tensor",
    "validate_povm",
]
