"""Gaussian-approximation bounds for downlink aggregate interference in
K-tier Poisson cellular networks, with a Monte-Carlo verification engine."""

__version__ = "0.1.0"

from .model import (
    DegenerateScenarioError,
    Deterministic,
    DivergenceError,
    FadingParameterError,
    Homogeneous2D,
    NakagamiPower,
    PathLossFamily,
    PathLossModel,
    PiecewiseTable,
    PowerRadial,
    RayleighPower,
    RicianPower,
    Scenario,
    ScenarioValidationError,
    TierConfig,
    fading_moments,
    fading_sample,
    path_loss_eval,
    radial_measure,
    validate_scenario,
)
from .analytics import (
    GaussianBound,
    TierIntegrals,
    berry_esseen_crossover,
    berry_esseen_factor,
    campbell_mean,
    campbell_variance,
    cdf_envelope,
    density_scaling_certificate,
    laplace_transform,
    scaling_coefficient,
    scaling_coefficient_homogeneous,
    scaling_coefficient_identical_tiers,
    scaling_lower_bound,
    std_normal_cdf,
    tier_integral,
    tier_integrals,
)
from .simulate import (
    Construction,
    SampleSet,
    SimConfig,
    interference_realization,
    monte_carlo,
    sample_distances,
    standardize,
    truncation_bias_bound,
)
from .empirics import (
    EmpiricalReport,
    convergence_diagnostic,
    dkw_epsilon,
    empirical_cdf,
    envelope_report,
    ks_distance_to_normal,
)
from .scenario_io import (
    load_scenario,
    preset_figure1,
    preset_single,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

__all__ = [name for name in dir() if not name.startswith("_")]
