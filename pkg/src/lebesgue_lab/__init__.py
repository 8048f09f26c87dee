"""Numerical verification of sharp Dirichlet-kernel norm bounds and their
consequence for the max-entropy power of sums of integer-valued variables."""

from .epi import (
    EpiInstance,
    EpiReport,
    HolderChain,
    RogozinCheck,
    check_epi,
    check_rogozin,
    check_single_index_epi,
    handcrafted_corpus,
    holder_bound_chain,
    holder_exponents,
    instance_from_json_obj,
    instance_to_json_obj,
    load_instances,
    make_instance,
    random_instance,
    save_instances,
)
from .errors import (
    ConvolutionOverflowError,
    DomainError,
    GenerationError,
    PreconditionError,
    VerificationError,
)
from .kernel import (
    EvalPoint,
    KernelSpec,
    TruncatedGaussian,
    check_first_arch_domination,
    eval_gaussian,
    eval_kernel,
    gaussian_distribution_function,
    kernel_slope,
)
from .levelsets import (
    BumpProfile,
    SignChangeReport,
    bump_profiles,
    check_derivative_bounds,
    comparison_functional,
    detect_sign_change,
    slope_sum,
    superlevel_measure,
    superlevel_measure_many,
)
from .pmf import EntropySummary, Pmf, convolve, convolve_many, entropy_summary, l_index, uniform
from .quadrature import (
    AsymptoticComparison,
    BoundCertificate,
    LpNormResult,
    QuadratureConfig,
    asymptotic_comparison,
    ball_half,
    ball_integral,
    certify_bound,
    lp_norm,
    norm_bound,
    product_kernel_l1,
)

__version__ = "0.1.0"
