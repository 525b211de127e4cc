"""Pick-and-Freeze global sensitivity analysis toolkit."""

from .analytic import (
    ExpModel,
    ToyModel,
    dump_toy_oracle_csv,
    exp_cvm_closed,
    exp_hq_closed,
    exp_sobol_closed,
    gaussian_orthant_g,
    quadrature,
    toy_cvm_closed,
    toy_cvm_integral,
    toy_eval,
    toy_hq_closed,
)
from .design import (
    CvmDesign,
    Model,
    PickFreezeDesign,
    build_cvm_design,
    build_pickfreeze,
    evaluate_model,
    read_design_csv,
    write_design_csv,
)
from .distributions import (
    Bernoulli,
    Beta,
    Distribution,
    Exponential,
    Gaussian,
    InputModel,
    TruncatedBetaMixture,
    Uniform,
    cdf,
    dist_from_dict,
    fit_beta,
    sample,
)
from .estimators import (
    Estimate,
    SymmetricProducts,
    beta_index,
    cvm_estimate,
    cvm_normalize,
    cvm_variance_plugin,
    dominance_count,
    hsobol,
    hsobol_variance,
    multivariate_sobol,
    sobol_classic,
    symmetric_products,
)
from .external import external_model_roundtrip
from .gca import (
    GcaParams,
    GcaStudyConfig,
    GcaStudyReport,
    expected_utilities_oracle,
    gca_model,
    gca_utilities,
    ranking_string,
    run_gca_study,
    strategy_utilities,
)
from .streams import Stream

__version__ = "0.1.0"
