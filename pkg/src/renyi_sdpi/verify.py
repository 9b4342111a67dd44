"""Randomized property suites over seeded random instances.

Each suite takes a ``numpy.random.Generator`` and returns ``(ok, info)`` for
one instance; :func:`run_suite` drives ``n`` instances with seeds derived
from ``(seed, index)`` so any failing instance can be replayed alone.
"""
from __future__ import annotations

import math

import numpy as np

from .divergences import Hellinger, Renyi
from .measures import MarkovKernel, ProbabilityMeasure, z_channel
from .sdpi import (
    LogOnePlus,
    SearchConfig,
    eta_chi2_dd,
    eta_di,
    eta_infty_dd,
    eta_infty_kernel,
    eta_infty_tv_bounds,
    eta_tv_kernel,
    support_structure,
    transformed_sdpi_compare,
)

SLACK = 1e-6


def random_kernel(rng, n_in, n_out, zero_prob=0.0) -> MarkovKernel:
    """Dirichlet rows; each entry is zeroed with ``zero_prob`` (rows keep one nonzero)."""
    R = rng.dirichlet(np.ones(n_out), size=n_in)
    if zero_prob > 0:
        mask = rng.random(R.shape) < zero_prob
        for x in range(n_in):
            if mask[x].all():
                mask[x, rng.integers(n_out)] = False
        R = np.where(mask, 0.0, R)
        R /= R.sum(axis=1, keepdims=True)
    return MarkovKernel(R)


def random_measure(rng, n) -> ProbabilityMeasure:
    w = rng.dirichlet(np.ones(n))
    return ProbabilityMeasure(w / w.sum())


def _dims(rng, max_dim):
    return int(rng.integers(2, max_dim + 1)), int(rng.integers(2, max_dim + 1))


def regime_split(rng, max_dim=6, config=None, alphas_low=(0.25, 0.5, 0.75), alphas_high=(2, 4, 8)):
    """Rényi vs Hellinger constants at ``mu``: ordered by regime, both above chi-squared."""
    n_in, n_out = _dims(rng, max_dim)
    mu, K = random_measure(rng, n_in), random_kernel(rng, n_in, n_out)
    return regime_split_at(mu, K, config, alphas_low, alphas_high)


def regime_split_at(mu, K, config=None, alphas_low=(0.25, 0.5, 0.75), alphas_high=(2, 4, 8)):
    config = config or SearchConfig(restarts=8)
    chi2 = eta_chi2_dd(mu, K).value
    for a in tuple(alphas_low) + tuple(alphas_high):
        h, r = transformed_sdpi_compare(mu, K, Hellinger(a), LogOnePlus(a - 1), config)
        ordered = r <= h + SLACK if a < 1 else r >= h - SLACK
        if not (ordered and h >= chi2 - SLACK and r >= chi2 - SLACK):
            return False, {"alpha": a, "eta_renyi": r, "eta_hellinger": h, "eta_chi2": chi2}
    return True, {}


def dobrushin_split(rng, max_dim=6, config=None):
    """For orders in ``[0, 1]`` the constant never exceeds the Dobrushin coefficient."""
    config = config or SearchConfig(crosscheck=False)
    n_in, n_out = _dims(rng, max_dim)
    K = random_kernel(rng, n_in, n_out, zero_prob=rng.choice([0.0, 0.3]))
    tv = eta_tv_kernel(K).value
    for a in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = eta_di(K, Renyi(a), config).value
        if v > tv + SLACK:
            return False, {"alpha": a, "eta": v, "eta_tv": tv}
    lam = float(rng.uniform(0.05, 0.95))
    Z = z_channel(lam)
    if not (eta_infty_kernel(Z).value == 1.0 and eta_tv_kernel(Z).value < 1.0):
        return False, {"lambda": lam}
    return True, {}


def characterization(rng, max_dim=6, config=None):
    """``eta_inf(K) = 1`` iff row supports differ; order-1/2 constant hits 1 iff rows are disjoint."""
    config = config or SearchConfig(crosscheck=False)
    n_in, n_out = _dims(rng, max_dim)
    K = random_kernel(rng, n_in, n_out, zero_prob=float(rng.choice([0.2, 0.4, 0.6])))
    disjoint, unequal = support_structure(K)
    inf_is_one = eta_infty_kernel(K).value == 1.0
    half_is_one = eta_di(K, Renyi(0.5), config).value >= 1.0 - SLACK
    ok = inf_is_one == unequal and half_is_one == disjoint
    return ok, {"disjoint": disjoint, "unequal": unequal, "inf_is_one": inf_is_one, "half_is_one": half_is_one}


def sandwich(rng, max_dim=6, config=None):
    """TV-based bounds bracket the order-infinity constant at a full-support ``mu``."""
    n_in, n_out = _dims(rng, max_dim)
    mu, K = random_measure(rng, n_in), random_kernel(rng, n_in, n_out)
    lo, hi = eta_infty_tv_bounds(mu, K, config=config)
    v = eta_infty_dd(mu, K).value
    ok = lo <= v + 1e-9 and v <= hi + 1e-9
    return ok, {"lower": lo, "value": v, "upper": hi}


SUITES = {
    "regime": regime_split,
    "dobrushin": dobrushin_split,
    "characterization": characterization,
    "sandwich": sandwich,
}


def run_suite(name: str, n: int, seed: int = 0, max_dim: int = 6, config=None):
    """Run ``n`` instances; returns ``(passed, failures)`` with failure details."""
    fn = SUITES[name]
    passed, failures = 0, []
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        ok, info = fn(rng, max_dim=max_dim, config=config)
        if ok:
            passed += 1
        else:
            failures.append({"instance": i, **{k: _plain(v) for k, v in info.items()}})
    return passed, failures


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v) if math.isfinite(v) else str(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v
