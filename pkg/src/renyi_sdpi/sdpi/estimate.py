"""Result types shared by every contraction-constant routine."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..divergences import DivergenceKind, divergence
from ..errors import ParameterOutOfRange, UnsupportedKind
from ..measures import MarkovKernel, ProbabilityMeasure, apply_kernel, restrict


class Method(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    SUBSET_ENUMERATION = "SubsetEnumeration"
    BINARY_PAIR_SEARCH = "BinaryPairSearch"
    BOUNDARY_BRUTE_FORCE = "BoundaryBruteForce"
    SPECTRAL = "Spectral"
    SIMPLEX_SEARCH = "SimplexSearch"
    RADIUS_SCAN = "RadiusScan"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PairOfMeasures:
    nu: ProbabilityMeasure
    mu: ProbabilityMeasure

    def to_dict(self):
        return {"type": "PairOfMeasures", "nu": self.nu.weights.tolist(), "mu": self.mu.weights.tolist()}


@dataclass(frozen=True)
class Subset:
    A: tuple

    def to_dict(self):
        return {"type": "Subset", "A": list(self.A)}


@dataclass(frozen=True)
class RowPair:
    x: int
    x_prime: int

    def to_dict(self):
        return {"type": "RowPair", "x": self.x, "x_prime": self.x_prime}


@dataclass(frozen=True)
class BinaryPair:
    """``nu = p d_x + (1-p) d_x'`` and ``mu = q d_x + (1-q) d_x'``.

    The weights are stored as logits so that pairs sitting extremely close to
    a vertex (``q = 1e-40`` and beyond) survive a round trip.
    """

    x: int
    x_prime: int
    logit_p: float
    logit_q: float

    def measures(self, n: int) -> tuple[ProbabilityMeasure, ProbabilityMeasure]:
        def two_point(logit):
            w = np.zeros(n)
            w[self.x] = _expit(logit)
            w[self.x_prime] = _expit(-logit)
            return ProbabilityMeasure(w / w.sum())

        return two_point(self.logit_p), two_point(self.logit_q)

    def to_dict(self):
        return {"type": "BinaryPair", "x": self.x, "x_prime": self.x_prime,
                "logit_p": self.logit_p, "logit_q": self.logit_q}


Certificate = Optional[Union[PairOfMeasures, Subset, RowPair, BinaryPair]]


def _expit(l):
    return 1.0 / (1.0 + math.exp(-l)) if l >= 0 else math.exp(l) / (1.0 + math.exp(l))


@dataclass(frozen=True)
class SdpiEstimate:
    """A contraction constant with the evidence that produced it.

    ``lower_bound <= value <= upper_bound`` always holds; searches report
    ``upper_bound = 1`` because they only certify the value from below.
    """

    value: float
    certificate: Certificate
    method: Method
    lower_bound: float
    upper_bound: float
    kind: Optional[DivergenceKind] = None
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lo, v, hi = self.lower_bound, self.value, self.upper_bound
        if not (0.0 <= lo <= v <= hi <= 1.0):
            raise ValueError(f"inconsistent estimate: {lo} <= {v} <= {hi} must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": str(self.method),
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "kind": None if self.kind is None else str(self.kind),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "details": {k: _plain(v) for k, v in sorted(self.details.items())},
        }


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def clamp01(v: float) -> float:
    return min(1.0, max(0.0, float(v)))


def exact(value, certificate, method, kind=None, **details) -> SdpiEstimate:
    v = clamp01(value)
    return SdpiEstimate(v, certificate, method, v, v, kind, details)


def lower(value, certificate, method, kind=None, **details) -> SdpiEstimate:
    v = clamp01(value)
    return SdpiEstimate(v, certificate, method, v, 1.0, kind, details)


@dataclass(frozen=True)
class SearchConfig:
    """Budget for the searches; ``seed`` fixes every random choice."""

    restarts: int = 32
    seed: int = 0
    grid: int = 512
    refine_rounds: int = 3
    fatol: float = 1e-9
    xatol: float = 1e-7
    maxfev: Optional[int] = None
    step: float = 1.0
    max_enumerated_support: int = 12
    crosscheck: bool = True
    crosscheck_grid: int = 128

    def fev_limit(self, dim: int) -> int:
        return self.maxfev if self.maxfev is not None else 400 * max(dim, 1) + 400


class Convexity(str, enum.Enum):
    CONVEX = "Convex"
    CONCAVE = "Concave"


@dataclass(frozen=True)
class LogOnePlus:
    """``g(x) = log(1 + scale x) / scale``: concave for ``scale > 0``, convex below.

    With ``scale = alpha - 1`` it maps the Hellinger divergence of order
    ``alpha`` to the Rényi divergence of the same order.
    """

    scale: float

    def __post_init__(self):
        if self.scale == 0 or not math.isfinite(self.scale):
            raise ParameterOutOfRange("LogOnePlus needs a finite nonzero scale")

    @property
    def convexity(self) -> Convexity:
        return Convexity.CONCAVE if self.scale > 0 else Convexity.CONVEX

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        arg = self.scale * x
        with np.errstate(all="ignore"):
            out = np.where(arg > -1, np.log1p(arg) / self.scale, np.inf)
        return np.where(np.isinf(x), np.inf, out)

    def local_ratio(self, c: float) -> float:
        """Limit of the transformed ratio when the untransformed one tends to ``c`` near zero."""
        return c


@dataclass(frozen=True)
class Power:
    """``g(x) = x ** lam``: concave for ``lam < 1``, convex above."""

    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)) or self.lam == 1:
            raise ParameterOutOfRange("Power needs a finite exponent > 0 other than 1")

    @property
    def convexity(self) -> Convexity:
        return Convexity.CONCAVE if self.lam < 1 else Convexity.CONVEX

    def __call__(self, x):
        return np.power(np.asarray(x, dtype=float), self.lam)

    def local_ratio(self, c: float) -> float:
        return c ** self.lam


TransformSpec = Union[LogOnePlus, Power]


def contraction_ratio(nu, mu, K, kind) -> float:
    """``D(nu K || mu K) / D(nu || mu)``; NaN when the denominator is 0 or infinite."""
    din = divergence(nu, mu, kind)
    if not (0 < din < math.inf):
        return math.nan
    return divergence(apply_kernel(nu, K), apply_kernel(mu, K), kind) / din


def evaluate_certificate(cert: Certificate, K: MarkovKernel, kind: DivergenceKind,
                         mu: ProbabilityMeasure | None = None) -> float:
    """Recompute the quantity a certificate stands for, from scratch."""
    from .. import _backend

    if isinstance(cert, PairOfMeasures):
        return contraction_ratio(cert.nu, cert.mu, K, kind)
    if isinstance(cert, Subset):
        if mu is None:
            raise ValueError("a Subset certificate needs the reference measure")
        return contraction_ratio(restrict(mu, cert.A), mu, K, kind)
    if isinstance(cert, BinaryPair):
        rows = K.rows[[cert.x, cert.x_prime]]
        keep = rows.sum(axis=0) > 0
        with np.errstate(divide="ignore"):
            la, lb = np.log(rows[:, keep])
        code, alpha = kind.code
        return float(_backend.kernels.binary_ratio(la, lb, cert.logit_p, cert.logit_q, code, alpha))
    if isinstance(cert, RowPair):
        a, b = K.rows[cert.x], K.rows[cert.x_prime]
        if kind.family == "tv":
            return 0.5 * float(np.abs(a - b).sum())
        if kind.family == "renyi" and math.isinf(kind.alpha):
            on = a > 0
            return 1.0 - float(np.min(b[on] / a[on]))
        raise UnsupportedKind(f"row-pair certificates are defined for TV and order infinity, not {kind}")
    raise ValueError("no certificate to evaluate")
