"""Divergences and strong data-processing contraction constants of finite channels."""
from ._backend import NAME as BACKEND
from .divergences import (
    CHI2,
    KL,
    LINF,
    TV,
    DivergenceKind,
    Hellinger,
    Renyi,
    chi_squared,
    divergence,
    hellinger,
    hellinger_to_renyi,
    kl,
    linf_divergence,
    parse_alpha,
    phi_divergence,
    renyi,
    total_variation,
)
from .errors import SdpiError
from .measures import (
    MarkovKernel,
    ProbabilityMeasure,
    apply_kernel,
    bsc,
    dual_kernel,
    identity,
    load_kernel,
    load_measure,
    make_kernel,
    make_measure,
    named_channel,
    rank_one,
    restrict,
    tensor,
    z_channel,
)
from .mixing import ChainSpec, MixingReport, compare_bounds, stationary
from .sdpi import *  # noqa: F401,F403
from .sdpi import __all__ as _sdpi_all

__all__ = [
    "BACKEND", "CHI2", "KL", "LINF", "TV", "DivergenceKind", "Hellinger", "Renyi", "chi_squared",
    "divergence", "hellinger", "hellinger_to_renyi", "kl", "linf_divergence", "parse_alpha",
    "phi_divergence", "renyi", "total_variation", "SdpiError", "MarkovKernel", "ProbabilityMeasure",
    "apply_kernel", "bsc", "dual_kernel", "identity", "load_kernel", "load_measure", "make_kernel",
    "make_measure", "named_channel", "rank_one", "restrict", "tensor", "z_channel", "ChainSpec",
    "MixingReport", "compare_bounds", "stationary", *_sdpi_all,
]
