"""Exact ReLU-network algebra and certified constructive approximations."""

from .analytic import (
    build_exp,
    build_inv_sigma2k_net,
    build_m_net,
    build_reciprocal,
    build_root,
    build_schedule_nets,
    build_sigma2_net,
    clamp_above_net,
    graded_mesh,
    pwl_interp_net,
)
from .blocks import (
    build_abs,
    build_max,
    build_mid,
    build_monomial,
    build_point_fit,
    build_polynomial,
    build_product,
    build_square,
    build_step,
    pwl_net,
    step_capacity,
)
from .certificate import (
    CERT_FIELDS,
    ApproxParams,
    BudgetError,
    CertificateError,
    ErrorCertificate,
    check_budget,
    measure_sup,
)
from .kde_net import KdeNetConfig, build_kde_net, build_score_net
from .network import (
    Layer,
    ReluNetwork,
    chain,
    compose,
    constant_net,
    extend_depth,
    from_affine,
    identity_net,
    parallel,
    post_affine,
    pre_affine,
    scale_output,
    selector_net,
    sum_outputs,
)

__all__ = [
    "ApproxParams", "BudgetError", "CertificateError", "ErrorCertificate",
    "CERT_FIELDS", "check_budget", "measure_sup",
    "Layer", "ReluNetwork", "chain", "compose", "constant_net", "extend_depth",
    "from_affine", "identity_net", "parallel", "post_affine", "pre_affine",
    "scale_output", "selector_net", "sum_outputs",
    "build_abs", "build_max", "build_mid", "build_monomial", "build_point_fit",
    "build_polynomial", "build_product", "build_square", "build_step",
    "pwl_net", "step_capacity",
    "build_exp", "build_root", "build_reciprocal", "build_m_net",
    "build_sigma2_net", "build_inv_sigma2k_net", "build_schedule_nets",
    "clamp_above_net", "graded_mesh", "pwl_interp_net",
    "KdeNetConfig", "build_kde_net", "build_score_net",
]
