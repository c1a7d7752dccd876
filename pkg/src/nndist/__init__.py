"""Neural net distance estimation, minimax bound constants and verification."""

from ._backend import backend_name
from .bounds import (
    BoundReport,
    combined_deviation_bound,
    comparison_factors,
    linear_region_caps,
    lower_bound_bounded,
    lower_bound_unbounded,
    rademacher_bound,
    relu_lower_bound_profiles,
    upper_bound_bounded,
    upper_bound_unbounded,
)
from .constraints import ConstraintSet, is_feasible, layer_norms, project, project_l1_ball
from .distributions import (
    DistributionSpec,
    LeCamQuadruple,
    SampleSet,
    derive_seed,
    finite_support_spec,
    gaussian_spec,
    kl_divergence,
    lecam_binary_quadruple,
    lecam_gaussian_quadruple,
    rng_from,
    sample,
    total_kl,
)
from .estimator import (
    AscentConfig,
    EstimateResult,
    QuadratureConfig,
    WitnessChain,
    ascent_supremum,
    brute_force_nnd,
    build_witness_frobenius,
    build_witness_one_inf,
    empirical_objective,
    estimate_nnd,
    grid_supremum,
    witness_chain,
    witness_difference_floor,
    witness_gap_exact,
)
from .networks import (
    ActivationProfile,
    GradientBundle,
    NetworkParams,
    NetworkSpec,
    activation_profile,
    batch_forward,
    forward,
    grad_params,
    scalar_chain,
)
from .verify import (
    MCResult,
    RateResult,
    TailCheck,
    bounded_difference_check,
    concentration_tailcheck,
    mc_rademacher,
    mgf_check,
    rate_experiment,
    spectral_norm_power,
)

__version__ = "0.1.0"
