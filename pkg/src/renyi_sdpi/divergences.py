"""Rényi, KL, total-variation, Hellinger, chi-squared and L-infinity divergences.

All finite-order sums run in the log domain. Near ``nu == mu`` the naive
``log(sum nu^a mu^(1-a))`` loses every significant digit, so the evaluator
switches to a second-order form whose terms share one sign::

    sum_x mu(x) * (r^a - 1 - a (r - 1)),   r = nu(x) / mu(x)

which is exact whenever ``nu << mu`` (the linear terms sum to zero).

Zero-mass conventions:

* ``alpha > 1``, ``alpha = 1`` (KL), ``alpha = inf``, L-infinity: ``+inf``
  unless ``nu << mu``.
* ``0 < alpha < 1``: points where either measure vanishes contribute nothing;
  ``+inf`` only for disjoint supports.
* ``alpha = 0``: ``-log mu(supp nu)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionMismatch, InvalidOrder, UnsupportedKind
from .measures import ProbabilityMeasure

# integer codes shared with the compiled core
RENYI, KL_CODE, RENYI_INF, HELLINGER, TV_CODE, LINF_CODE, RENYI_ZERO = range(7)

_SMALL_LOG = 0.1
_BIG_EXP = 30.0


def parse_alpha(value) -> float:
    """Order in ``[0, inf]``; accepts floats and the strings ``"inf"``/``"∞"``."""
    if isinstance(value, str):
        s = value.strip().lower()
        if s in ("inf", "infinity", "∞", "+inf"):
            return math.inf
        try:
            value = float(s)
        except ValueError:
            raise InvalidOrder(f"cannot parse order {value!r}") from None
    a = float(value)
    if math.isnan(a) or a < 0:
        raise InvalidOrder(f"order must lie in [0, inf], got {value!r}")
    return a


@dataclass(frozen=True)
class DivergenceKind:
    """Which divergence to evaluate.

    ``family`` is one of ``renyi``, ``kl``, ``tv``, ``hellinger``, ``chi2``,
    ``linf``; ``alpha`` is used by the two parametric families.
    """

    family: str
    alpha: float | None = None

    def __post_init__(self):
        fam = self.family.lower()
        object.__setattr__(self, "family", fam)
        if fam == "renyi":
            object.__setattr__(self, "alpha", parse_alpha(self.alpha))
        elif fam == "hellinger":
            a = parse_alpha(self.alpha)
            if a == 1:
                # the order-1 member of the family is KL
                object.__setattr__(self, "family", "kl")
                object.__setattr__(self, "alpha", None)
                return
            if a == 0 or math.isinf(a):
                raise InvalidOrder(f"Hellinger order must be positive and finite, got {a}")
            object.__setattr__(self, "alpha", a)
        elif fam in ("kl", "tv", "chi2", "linf"):
            object.__setattr__(self, "alpha", None)
        else:
            raise UnsupportedKind(f"unknown divergence family {self.family!r}")

    @classmethod
    def renyi(cls, alpha) -> "DivergenceKind":
        return cls("renyi", alpha)

    @classmethod
    def hellinger(cls, alpha) -> "DivergenceKind":
        return cls("hellinger", alpha)

    @property
    def code(self) -> tuple[int, float]:
        """``(code, alpha)`` pair understood by the numeric kernels."""
        fam, a = self.family, self.alpha
        if fam == "renyi":
            if a == 0:
                return RENYI_ZERO, 0.0
            if a == 1:
                return KL_CODE, 1.0
            if math.isinf(a):
                return RENYI_INF, math.inf
            return RENYI, a
        if fam == "kl":
            return KL_CODE, 1.0
        if fam == "tv":
            return TV_CODE, 0.0
        if fam == "hellinger":
            return HELLINGER, a
        if fam == "chi2":
            return HELLINGER, 2.0
        return LINF_CODE, 0.0

    @property
    def is_renyi(self) -> bool:
        return self.family == "renyi" or self.family == "kl"

    def __str__(self):
        if self.alpha is None:
            return self.family
        a = "inf" if math.isinf(self.alpha) else repr(self.alpha)
        return f"{self.family}({a})"


def Renyi(alpha) -> DivergenceKind:
    return DivergenceKind.renyi(alpha)


def Hellinger(alpha) -> DivergenceKind:
    return DivergenceKind.hellinger(alpha)


KL = DivergenceKind("kl")
TV = DivergenceKind("tv")
CHI2 = DivergenceKind("chi2")
LINF = DivergenceKind("linf")


def divergence_from_logs(lp, lq, code: int, alpha: float = 0.0, outside=0.0):
    """Vectorized divergence of ``nu`` from ``mu`` given log-weights.

    ``lq`` must be finite: callers restrict both vectors to ``supp(mu)`` and
    pass the mass of ``nu`` lying outside it as ``outside``. ``lp`` may hold
    ``-inf``. Reduction runs over the last axis.
    """
    lp = np.asarray(lp, dtype=float)
    lq = np.asarray(lq, dtype=float)
    outside = np.asarray(outside, dtype=float)
    with np.errstate(all="ignore"):
        on = lp > -np.inf
        l = np.where(on, lp - lq, -np.inf)
        mu = np.exp(lq)
        if code == RENYI_INF or code == LINF_CODE:
            d = np.max(l, axis=-1)
            if code == LINF_CODE:
                d = np.expm1(d)
            d = np.where(outside > 0, np.inf, d)
        elif code == RENYI_ZERO:
            missing = np.sum(np.where(on, 0.0, mu), axis=-1)
            # when most mass is missing, 1 - missing loses every digit
            covered = -logsumexp(np.where(on, lq, -np.inf), axis=-1)
            d = np.where(missing > 0.5, covered, -np.log1p(-missing))
            d = np.where(np.any(on, axis=-1), d, np.inf)
        elif code == TV_CODE:
            nu = np.exp(lp)
            diff = np.where(l > _BIG_EXP, nu - mu, mu * np.expm1(l))
            d = 0.5 * (np.sum(np.abs(diff), axis=-1) + outside)
        elif code == KL_CODE:
            nu = np.exp(lp)
            t = np.where(l > _BIG_EXP, nu * l - nu + mu, nu * l - mu * np.expm1(l))
            t = np.where(on, t, mu)
            d = np.sum(t, axis=-1)
            d = np.where(outside > 0, np.inf, d)
        elif code == RENYI or code == HELLINGER:
            d = _power_family(lp, lq, l, mu, code, alpha, outside)
        else:
            raise UnsupportedKind(f"unknown divergence code {code}")
        d = np.where(d > 0, d, 0.0)
    return d[()] if d.ndim == 0 else d


def _power_family(lp, lq, l, mu, code, alpha, outside):
    a = alpha * l
    big = lq + a
    L = logsumexp(big, axis=-1)
    nu = np.exp(lp)
    t = np.where(
        a > _BIG_EXP,
        np.exp(big) - (1 - alpha) * mu - alpha * nu,
        mu * (np.expm1(a) - alpha * np.expm1(l)),
    )
    s_stable = np.sum(t, axis=-1) - alpha * outside
    small = np.abs(L) < _SMALL_LOG
    if code == RENYI:
        d = np.where(small, np.log1p(s_stable), L) / (alpha - 1)
    else:
        d = np.where(small, s_stable, np.expm1(L)) / (alpha - 1)
    if alpha > 1:
        d = np.where(outside > 0, np.inf, d)
    return d


def _prepare(nu: ProbabilityMeasure, mu: ProbabilityMeasure):
    if nu.n != mu.n:
        raise DimensionMismatch(f"measures have {nu.n} and {mu.n} points")
    mask = mu.weights > 0
    with np.errstate(divide="ignore"):
        lp = np.log(nu.weights[mask])
        lq = np.log(mu.weights[mask])
    outside = float(nu.weights[~mask].sum())
    return lp, lq, outside


def divergence(nu: ProbabilityMeasure, mu: ProbabilityMeasure, kind: DivergenceKind) -> float:
    """``D(nu || mu)`` for any supported kind; ``+inf`` is a legitimate value."""
    lp, lq, outside = _prepare(nu, mu)
    code, alpha = kind.code
    return float(divergence_from_logs(lp, lq, code, alpha, outside))


def renyi(nu: ProbabilityMeasure, mu: ProbabilityMeasure, alpha) -> float:
    """Rényi divergence ``D_alpha(nu || mu)`` for ``alpha`` in ``[0, inf]``."""
    return divergence(nu, mu, Renyi(alpha))


def kl(nu: ProbabilityMeasure, mu: ProbabilityMeasure) -> float:
    return divergence(nu, mu, KL)


def total_variation(nu: ProbabilityMeasure, mu: ProbabilityMeasure) -> float:
    """``(1/2) sum |nu - mu|``, so that the value lies in ``[0, 1]``."""
    return divergence(nu, mu, TV)


def hellinger(nu: ProbabilityMeasure, mu: ProbabilityMeasure, alpha: float) -> float:
    return divergence(nu, mu, Hellinger(alpha))


def chi_squared(nu: ProbabilityMeasure, mu: ProbabilityMeasure) -> float:
    return divergence(nu, mu, CHI2)


def linf_divergence(nu: ProbabilityMeasure, mu: ProbabilityMeasure) -> float:
    """``max_x nu(x)/mu(x) - 1``."""
    return divergence(nu, mu, LINF)


def phi_divergence(nu: ProbabilityMeasure, mu: ProbabilityMeasure, kind: DivergenceKind) -> float:
    if kind.family == "renyi":
        raise UnsupportedKind("Rényi divergences are not phi-divergences; use renyi()")
    return divergence(nu, mu, kind)


def hellinger_to_renyi(h: float, alpha: float) -> float:
    """Map a Hellinger value to the Rényi value of the same order.

    ``D = log(1 + (alpha - 1) h) / (alpha - 1)``; arguments that drive the
    logarithm to zero or below give ``+inf``.
    """
    alpha = float(alpha)
    if alpha == 1 or alpha <= 0 or math.isinf(alpha):
        raise InvalidOrder(f"conversion needs a finite order > 0 other than 1, got {alpha}")
    if math.isinf(h):
        return math.inf
    arg = (alpha - 1) * h
    if arg <= -1:
        return math.inf
    return max(math.log1p(arg) / (alpha - 1), 0.0)
