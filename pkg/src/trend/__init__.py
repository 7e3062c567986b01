"""Generative-model evaluation via per-dimension truncated generalized
normal density estimation (the TREND score), with an FID baseline."""

from .analysis import DimensionStats, PccSummary, dimension_stats, histogram, pairwise_pcc, pcc
from .divergence import ScoreReport, jsd, kld, trend_score
from .feature_io import (
    FeatureFileError,
    FeatureMatrix,
    MalformedHeaderError,
    NonFiniteValuesError,
    TruncatedPayloadError,
    UnsupportedVersionError,
    read_feature_file,
    subsample,
    write_feature_file,
)
from .fid import CovarianceError, GaussianStats, fid, gaussian_stats
from .fitting import (
    DimensionFit,
    FitConfig,
    FitStatus,
    FittedModel,
    ModelFormatError,
    NonFiniteDataError,
    fit_dimension,
    fit_model,
    load_model,
    log_likelihood,
    log_likelihoods,
    save_model,
)
from .special_math import (
    NonConvergenceError,
    QuadratureSpec,
    default_quadrature,
    gamma_function,
    integrate,
    lower_incomplete_gamma,
)
from .tgn import (
    DistributionKind,
    TgnParams,
    effective_support,
    kurtosis,
    log_pdf,
    pdf,
    sample,
    scale_landmarks,
)
from .toys import SCENARIOS, ToyResult, ToyScenario, generate_features, run_scenario

__version__ = "0.1.0"
