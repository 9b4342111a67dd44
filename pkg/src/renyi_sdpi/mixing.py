"""Convergence of finite Markov chains: linear versus non-linear contraction.

The linear bound shrinks the ``L^alpha(pi)`` deviation ``||d(nu K^n)/dpi - 1||``
geometrically. The non-linear one raises ``||d nu/dpi||`` to the power
``eta_alpha(pi, K)^n``. At ``alpha = 2`` both are stated for the squared
deviation, which is the unit used for the comparison report.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .divergences import Renyi
from .errors import (
    AbsoluteContinuityViolation,
    DimensionMismatch,
    NoConvergence,
    NotErgodic,
    RateOutOfRange,
)
from .measures import MarkovKernel, ProbabilityMeasure
from .sdpi import SearchConfig, eta_chi2_dd, eta_dd

STATIONARY_TOL = 1e-13


def is_ergodic(K: MarkovKernel) -> bool:
    """Some power ``K^m`` with ``m <= n^2`` is entrywise positive (zero pattern only)."""
    n = K.n_in
    A = (K.rows > 0).astype(np.int64)
    P = A.copy()
    for _ in range(n * n):
        if P.all():
            return True
        P = ((P @ A) > 0).astype(np.int64)
    return bool(P.all())


@dataclass(frozen=True)
class ChainSpec:
    kernel: MarkovKernel
    start: ProbabilityMeasure
    steps: int

    def __post_init__(self):
        K = self.kernel
        if K.n_in != K.n_out:
            raise DimensionMismatch("a chain needs a square kernel")
        if self.start.n != K.n_in:
            raise DimensionMismatch("start measure does not match the state space")
        if self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if not is_ergodic(K):
            raise NotErgodic("chain is not irreducible and aperiodic")


def _residual(pi, K):
    return float(np.max(np.abs(pi @ K.rows - pi)))


def stationary(K: MarkovKernel, tol: float = 1e-14, max_iter: int = 10**6) -> ProbabilityMeasure:
    """Unique ``pi`` with ``pi K = pi``: linear solve, power iteration if that is not accurate enough."""
    if K.n_in != K.n_out:
        raise DimensionMismatch("a chain needs a square kernel")
    if not is_ergodic(K):
        raise NotErgodic("chain is not irreducible and aperiodic")
    n = K.n_in
    if np.all(np.abs(K.rows.sum(axis=0) - 1.0) <= 1e-12):
        # doubly stochastic: uniform is stationary, return it without solver noise
        return ProbabilityMeasure(np.full(n, 1.0 / n))
    A = np.vstack([K.rows.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi = np.linalg.lstsq(A, b, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    if _residual(pi, K) > STATIONARY_TOL:
        pi = np.full(n, 1.0 / n) if not np.all(np.isfinite(pi)) else pi
        for _ in range(max_iter):
            nxt = pi @ K.rows
            nxt /= nxt.sum()
            done = np.max(np.abs(nxt - pi)) <= tol
            pi = nxt
            if done:
                break
        if _residual(pi, K) > STATIONARY_TOL:
            raise NoConvergence("stationary distribution did not converge")
    return ProbabilityMeasure(pi)


def _densities(spec: ChainSpec, pi: ProbabilityMeasure):
    """``d(nu K^n)/d pi`` for ``n = 0..steps``."""
    if np.any((spec.start.weights > 0) & (pi.weights == 0)):
        raise AbsoluteContinuityViolation("start measure charges a state the stationary law does not")
    on = pi.weights > 0
    out = []
    nu = spec.start.weights.copy()
    for n in range(spec.steps + 1):
        f = np.zeros_like(nu)
        f[on] = nu[on] / pi.weights[on]
        out.append(f)
        nu = nu @ spec.kernel.rows
        nu /= nu.sum()
    return out


def _lp_power(f, pi, alpha):
    return float(np.sum(pi.weights * np.abs(f) ** alpha))


def deviation_power(spec: ChainSpec, pi: ProbabilityMeasure, alpha: float = 2.0) -> list[float]:
    """``||d(nu K^n)/dpi - 1||^alpha`` without taking the root (exact at ``alpha = 2``)."""
    return [_lp_power(f - 1.0, pi, alpha) for f in _densities(spec, pi)]


def trajectory_dev(spec: ChainSpec, pi: ProbabilityMeasure, alpha: float = 2.0) -> list[float]:
    """``||d(nu K^n)/dpi - 1||_{L^alpha(pi)}`` for ``n = 0..steps``."""
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    if math.isinf(alpha):
        return [float(np.max(np.abs(f - 1.0)[pi.weights > 0])) for f in _densities(spec, pi)]
    return [p ** (1.0 / alpha) for p in deviation_power(spec, pi, alpha)]


def _check_rate(r):
    if not 0.0 <= r <= 1.0:
        raise RateOutOfRange(f"rate {r} outside [0, 1]")


def linear_bound(spec: ChainSpec, pi: ProbabilityMeasure, alpha: float, gamma: float) -> list[float]:
    """Geometric bound ``gamma^n * dev(0)``.

    At ``alpha = 2`` this is the squared form ``gamma^n * dev(0)^2`` whose
    natural rate is ``eta_chi2(pi, K)``.
    """
    _check_rate(gamma)
    if alpha == 2:
        d0 = deviation_power(ChainSpec(spec.kernel, spec.start, 1), pi, 2.0)[0]
    else:
        d0 = trajectory_dev(ChainSpec(spec.kernel, spec.start, 1), pi, alpha)[0]
    return [gamma ** n * d0 for n in range(spec.steps + 1)]


def nonlinear_bound(spec: ChainSpec, pi: ProbabilityMeasure, alpha: float, eta: float) -> list[float]:
    """Bound from the Rényi contraction: ``||d nu/dpi||^{eta^n}``.

    At ``alpha = 2`` it is returned in squared-deviation units,
    ``(||d nu/dpi||^2)^{eta^n} - 1``; otherwise it bounds the norm
    ``||d(nu K^n)/dpi||_{L^alpha(pi)}``.
    """
    _check_rate(eta)
    f0 = _densities(ChainSpec(spec.kernel, spec.start, 1), pi)[0]
    if alpha == 2:
        norm_sq = _lp_power(f0, pi, 2.0)
        return [norm_sq ** (eta ** n) - 1.0 for n in range(spec.steps + 1)]
    if math.isinf(alpha):
        norm = float(np.max(f0[pi.weights > 0]))
    else:
        norm = _lp_power(f0, pi, alpha) ** (1.0 / alpha)
    return [norm ** (eta ** n) for n in range(spec.steps + 1)]


@dataclass
class MixingReport:
    pi: ProbabilityMeasure
    eta_chi2: float
    eta_2: float
    gamma_alpha: float
    per_step: list = field(default_factory=list)  # (n, true_dev_sq, linear_bound, nonlinear_bound)
    crossing_index: Optional[int] = None
    certificate: Optional[dict] = None

    def to_json(self) -> str:
        return json.dumps({
            "pi": self.pi.weights.tolist(),
            "eta_chi2": self.eta_chi2,
            "eta_2": self.eta_2,
            "gamma_alpha": self.gamma_alpha,
            "crossing_index": self.crossing_index,
            "eta_2_certificate": self.certificate,
            "per_step": [dict(zip(("n", "true_dev_sq", "linear_bound", "nonlinear_bound"), row))
                         for row in self.per_step],
        }, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "true_dev_sq", "linear_bound", "nonlinear_bound"])
        for n, t, lin, non in self.per_step:
            w.writerow([n, f"{t:.17g}", f"{lin:.17g}", f"{non:.17g}"])
        return buf.getvalue()


def compare_bounds(spec: ChainSpec, config: SearchConfig | None = None) -> MixingReport:
    """Squared-deviation trajectory against both bounds at ``alpha = 2``.

    ``eta_2(pi, K)`` comes from the boundary search (64 restarts unless
    ``config`` says otherwise); ``crossing_index`` is the first ``n`` at which
    the non-linear bound exceeds the linear one.
    """
    config = config or SearchConfig(restarts=64)
    pi = stationary(spec.kernel)
    e_chi2 = eta_chi2_dd(pi, spec.kernel).value
    est2 = eta_dd(pi, spec.kernel, Renyi(2), config)
    e2 = est2.value
    true = deviation_power(spec, pi, 2.0)
    lin = linear_bound(spec, pi, 2.0, e_chi2)
    non = nonlinear_bound(spec, pi, 2.0, e2)
    rows = [(n, true[n], lin[n], non[n]) for n in range(spec.steps + 1)]
    crossing = next((n for n in range(spec.steps + 1) if non[n] > lin[n]), None)
    cert = est2.certificate.to_dict() if est2.certificate is not None else None
    return MixingReport(pi, e_chi2, e2, e_chi2, rows, crossing, cert)
