"""Gaussian MRF inference with mean-field, Bethe and fractional Bethe free energies.

Functions that take ``alpha`` accept a scalar (every edge) or one value per edge.
``minimize`` and ``message_passing`` return ``(report, moments)`` where the
report is the same dict the CLI prints.
"""

from ._core import (
    ConvergenceError,
    DomainError,
    ExactMarginals,
    GaussianModel,
    InvalidModelError,
    Moments,
    NormalizedModel,
    SpectralResult,
    UsageError,
    critical_alpha,
    critical_r,
    diagnose,
    exact_marginals,
    f_constrained,
    f_fractional,
    f_lower_bound,
    f_mean_field,
    generate,
    gradient_constrained,
    load_model,
    make_k_regular,
    message_passing,
    minimize,
    model_to_json,
    neg_log_partition,
    normalize,
    optimal_mean,
    parse_model_json,
    r_valid,
    random_model,
    random_tree_model,
    ray_scan,
    save_model,
    sigma_error,
    sigma_star,
    spectral,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
