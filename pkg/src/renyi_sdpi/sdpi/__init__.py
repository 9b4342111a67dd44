"""Strong data-processing contraction constants of finite Markov kernels."""
from .closed_form import (
    eta_chi2_dd,
    eta_infty_dd,
    eta_infty_kernel,
    eta_infty_tv_bounds,
    eta_tv_kernel,
    knapsack_sup,
    ldp_epsilon,
    support_structure,
    ultra_mixing_check,
)
from .estimate import (
    BinaryPair,
    Convexity,
    LogOnePlus,
    Method,
    PairOfMeasures,
    Power,
    RowPair,
    SdpiEstimate,
    SearchConfig,
    Subset,
    contraction_ratio,
    evaluate_certificate,
)
from .oracle import brute_force_eta, naive_divergence
from .search import binary_pair_search, eta_chi2_kernel, eta_dd, eta_di, transformed_sdpi_compare

__all__ = [
    "BinaryPair", "Convexity", "LogOnePlus", "Method", "PairOfMeasures", "Power", "RowPair",
    "SdpiEstimate", "SearchConfig", "Subset", "binary_pair_search", "brute_force_eta",
    "contraction_ratio", "eta_chi2_dd", "eta_chi2_kernel", "eta_dd", "eta_di", "eta_infty_dd",
    "eta_infty_kernel", "eta_infty_tv_bounds", "eta_tv_kernel", "evaluate_certificate",
    "knapsack_sup", "ldp_epsilon", "naive_divergence", "support_structure",
    "transformed_sdpi_compare", "ultra_mixing_check",
]
