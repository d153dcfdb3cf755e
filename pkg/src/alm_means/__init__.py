"""Multivariate operator means of positive matrices built by ALM-type iteration."""
from .alm import (
    AlmConfig,
    AlmOutcome,
    MeanTriple,
    MultiMean,
    alm_compute,
    alm_compute_n,
    alm_mean,
    alm_step,
    arithmetic_multimean,
    build_alm_multimean,
    build_alm_n_multimean,
    estimate_weight_vector,
    from_two_var,
    ordered_convergence_run,
    validate_multimeans,
    validate_triple,
)
from .errors import *  # noqa: F401,F403
from .kubo_ando import (
    TwoVarMean,
    adjoint,
    arithmetic,
    custom_mean,
    evaluate,
    geometric,
    harmonic,
    make_mean,
    transpose,
    weight_of,
)
from .linalg import SpdMatrix
from .metrics import gauge_R, spectral_radius, thompson
from .stochastic import closed_form_p3, gamma_from_multimeans, gamma_from_weights_3, perron_vector

__version__ = "0.1.0"
