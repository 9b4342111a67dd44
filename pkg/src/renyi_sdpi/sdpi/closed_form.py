"""Contraction constants with exact formulas or finite enumerations."""
from __future__ import annotations

import math

import numpy as np

from .. import _backend
from ..divergences import TV, Renyi
from ..errors import (
    AlphabetTooLarge,
    DegenerateMeasure,
    DimensionMismatch,
    InvalidRadius,
    NotFullSupport,
    ParameterOutOfRange,
)
from ..measures import MarkovKernel, ProbabilityMeasure, apply_kernel
from .estimate import Method, RowPair, Subset, exact

MAX_ENUMERATED_SUPPORT = 20
_RENYI_INF = Renyi(math.inf)


def _check_dims(mu: ProbabilityMeasure, K: MarkovKernel):
    if mu.n != K.n_in:
        raise DimensionMismatch(f"measure has {mu.n} points, kernel expects {K.n_in}")


def _support_of(mu):
    supp = mu.support
    if supp.size < 2:
        raise DegenerateMeasure("reference measure must charge at least two points")
    return supp


def row_tv_matrix(K: MarkovKernel) -> np.ndarray:
    R = K.rows
    return 0.5 * np.abs(R[:, None, :] - R[None, :, :]).sum(axis=2)


def eta_tv_kernel(K: MarkovKernel):
    """Dobrushin coefficient: the largest TV distance between two rows."""
    D = row_tv_matrix(K)
    x, xp = np.unravel_index(int(np.argmax(D)), D.shape)
    return exact(D[x, xp], RowPair(int(x), int(xp)), Method.CLOSED_FORM, TV)


def min_row_ratios(K: MarkovKernel) -> np.ndarray:
    """``M[x, x'] = min over y in supp K(.|x) of K(y|x') / K(y|x)``."""
    R = K.rows
    on = R > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(on[:, None, :], R[None, :, :] / np.where(on, R, 1.0)[:, None, :], np.inf)
    return ratio.min(axis=2)


def eta_infty_kernel(K: MarkovKernel):
    """Order-infinity constant ``max_{x,x'} 1 - min_y K(y|x')/K(y|x)``."""
    M = min_row_ratios(K)
    x, xp = np.unravel_index(int(np.argmin(M)), M.shape)
    return exact(1.0 - M[x, xp], RowPair(int(x), int(xp)), Method.CLOSED_FORM, _RENYI_INF)


def _restricted(mu: ProbabilityMeasure, K: MarkovKernel):
    supp = _support_of(mu)
    w = mu.weights[supp]
    w = w / w.sum()
    rows = K.rows[supp]
    out = np.flatnonzero(w @ rows > 0)
    return supp, w, rows[:, out]


def eta_infty_dd(mu: ProbabilityMeasure, K: MarkovKernel):
    """Order-infinity constant at ``mu`` by enumerating restrictions of ``mu``.

    Every nonempty proper subset ``A`` of the support is scored by
    ``D_inf(mu_A K || mu K) / log(1/mu(A))``; the best one is the certificate.
    """
    _check_dims(mu, K)
    supp = _support_of(mu)
    if supp.size > MAX_ENUMERATED_SUPPORT:
        raise AlphabetTooLarge(f"subset enumeration is capped at {MAX_ENUMERATED_SUPPORT} support points")
    supp, w, rows = _restricted(mu, K)
    best, mask = _backend.kernels.subset_scan(w, rows)
    A = tuple(int(supp[i]) for i in range(supp.size) if (mask >> i) & 1)
    return exact(best, Subset(A), Method.SUBSET_ENUMERATION, _RENYI_INF)


def knapsack_sup(mu: ProbabilityMeasure, K: MarkovKernel, y: int, t: float):
    """Maximize ``sum_x nu(x) K(y|x)`` over measures with ``nu <= e^t mu``.

    Greedy fill in decreasing order of ``K(y|x)`` (ties keep index order).
    Returns ``(value, nu)``.
    """
    _check_dims(mu, K)
    if not t > 0:
        raise InvalidRadius(f"radius must be positive, got {t}")
    if not 0 <= y < K.n_out:
        raise ParameterOutOfRange(f"output index {y} out of range")
    col = K.rows[:, y]
    order = np.argsort(-col, kind="stable")
    cap = math.exp(t) * mu.weights
    nu = np.zeros(mu.n)
    budget = 1.0
    for x in order:
        take = min(cap[x], budget)
        nu[x] = take
        budget -= take
        if budget <= 0:
            break
    nu = np.clip(nu, 0.0, None)
    nu = nu / nu.sum()
    return float(nu @ col), ProbabilityMeasure(nu)


def chi2_matrix(mu: ProbabilityMeasure, K: MarkovKernel) -> np.ndarray:
    supp = mu.support
    muK = mu.weights @ K.rows
    out = np.flatnonzero(muK > 0)
    w = mu.weights[supp]
    return np.sqrt(w)[:, None] * K.rows[np.ix_(supp, out)] / np.sqrt(muK[out])[None, :]


def eta_chi2_dd(mu: ProbabilityMeasure, K: MarkovKernel):
    """Squared second singular value of ``sqrt(mu(x)) K(y|x) / sqrt(muK(y))``.

    The top singular value is 1 (with singular vectors ``sqrt(mu)`` and
    ``sqrt(muK)``); the next one is the maximal correlation of the joint law.
    """
    _check_dims(mu, K)
    supp = _support_of(mu)
    rows = K.rows[supp]
    if np.all(rows == rows[0]):
        return exact(0.0, None, Method.SPECTRAL)
    s = np.linalg.svd(chi2_matrix(mu, K), compute_uv=False)
    value = s[1] ** 2 if s.size > 1 else 0.0
    return exact(value, None, Method.SPECTRAL)


def eta_infty_tv_bounds(mu: ProbabilityMeasure, K: MarkovKernel, require_lower: bool = True, config=None):
    """Bracket the order-infinity constant at ``mu`` with the TV constant.

    ``upper = eta_TV(mu, K) / min_y muK(y)`` (clamped to 1) and, for
    full-support ``mu``, ``lower = eta_TV(mu, K) * min_x mu(x)``. Returns
    ``(lower, upper)``; ``lower`` is ``None`` when it was not requested and
    ``mu`` lacks full support.
    """
    from .search import eta_dd

    _check_dims(mu, K)
    if not mu.has_full_support and require_lower:
        raise NotFullSupport("the lower bound needs a full-support reference measure")
    eta_tv = eta_dd(mu, K, TV, config).value
    min_out = float(apply_kernel(mu, K).weights.min())
    upper = 1.0 if min_out == 0 else min(1.0, eta_tv / min_out)
    lower = eta_tv * float(mu.weights.min()) if mu.has_full_support else None
    return lower, upper


def support_structure(K: MarkovKernel) -> tuple[bool, bool]:
    """``(has_disjoint_rows, has_unequal_supports)`` with exact-zero supports."""
    on = K.rows > 0
    overlap = (on.astype(int) @ on.T.astype(int)) > 0
    same = (on[:, None, :] == on[None, :, :]).all(axis=2)
    return bool((~overlap).any()), bool((~same).any())


def ldp_epsilon(K: MarkovKernel) -> float:
    """Smallest ``eps`` for which ``K`` is ``eps``-LDP, i.e. ``-log(1 - eta_inf(K))``.

    Read off the minimum row ratio directly to avoid the cancellation in
    ``1 - eta``.
    """
    r = float(min_row_ratios(K).min())
    return math.inf if r <= 0 else max(0.0, -math.log(r))


def ultra_mixing_check(K: MarkovKernel, eps: float, tol: float = 1e-12) -> bool:
    """Whether ``K(y|x')/K(y|x) >= eps`` for all ``x, x'`` and ``y`` in ``supp K(.|x)``.

    Evaluated both from the pointwise ratios and through ``eta_inf(K) <= 1 -
    eps``; the two must agree.
    """
    if not 0.0 <= eps <= 1.0:
        raise ParameterOutOfRange(f"eps={eps} outside [0, 1]")
    pointwise = bool(min_row_ratios(K).min() >= eps - tol)
    via_eta = bool(eta_infty_kernel(K).value <= 1.0 - eps + tol)
    if pointwise != via_eta:
        raise RuntimeError(f"ultra-mixing tests disagree at eps={eps}")
    return pointwise
