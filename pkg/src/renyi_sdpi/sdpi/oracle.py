"""Exhaustive-grid ground truth for the contraction constants.

Nothing here shares code with the searches: divergences are recomputed with
textbook linear-domain formulas and the optimizers are replaced by grids.
Intended for tests on small alphabets.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..divergences import DivergenceKind
from ..errors import AlphabetTooLarge, DegenerateMeasure, DimensionMismatch
from ..measures import MarkovKernel, ProbabilityMeasure
from .estimate import Method, PairOfMeasures, lower

MIN_DIV = 1e-12


def naive_divergence(nu, mu, kind: DivergenceKind):
    """Row-wise divergence of linear weights ``nu`` from ``mu`` (broadcasting)."""
    nu = np.asarray(nu, dtype=float)
    mu = np.broadcast_to(np.asarray(mu, dtype=float), nu.shape)
    fam, a = kind.family, kind.alpha
    both = (nu > 0) & (mu > 0)
    escapes = ((nu > 0) & (mu == 0)).any(axis=-1)
    with np.errstate(all="ignore"):
        ratio = np.where(both, nu / np.where(mu > 0, mu, 1.0), 0.0)
        if fam == "tv":
            return 0.5 * np.abs(nu - mu).sum(axis=-1)
        if fam == "kl" or (fam == "renyi" and a == 1):
            d = np.where(both, nu * np.log(np.where(both, ratio, 1.0)), 0.0).sum(axis=-1)
            return np.where(escapes, np.inf, d)
        if fam == "renyi" and a == 0:
            return -np.log(np.where(nu > 0, mu, 0.0).sum(axis=-1))
        if (fam == "renyi" and math.isinf(a)) or fam == "linf":
            top = np.where(nu > 0, ratio, 0.0).max(axis=-1)
            d = np.log(top) if fam == "renyi" else top - 1.0
            return np.where(escapes, np.inf, d)
        if fam == "chi2":
            a = 2.0
        s = np.where(both, nu ** a * np.where(both, mu, 1.0) ** (1 - a), 0.0).sum(axis=-1)
        if fam == "renyi":
            d = np.log(s) / (a - 1)
        else:
            d = (s - 1) / (a - 1)
        if a > 1:
            d = np.where(escapes, np.inf, d)
        return d


def _ratios(points, mu_w, K, kind):
    din = naive_divergence(points, mu_w, kind)
    dout = naive_divergence(points @ K.rows, mu_w @ K.rows, kind)
    ok = (din > MIN_DIV) & np.isfinite(din)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(ok, dout / np.where(ok, din, 1.0), -np.inf)


def simplex_grid(k: int, N: int) -> np.ndarray:
    """All points of the ``(k-1)``-simplex with coordinates in ``{0, 1/N, ..., 1}``."""
    return _compositions(k, N) / N


def _compositions(k, N):
    # integer vectors of length k summing to N
    if k == 1:
        return np.array([[N]], dtype=float)
    if k == 2:
        a = np.arange(N + 1, dtype=float)
        return np.stack([a, N - a], axis=1)
    parts = []
    for first in range(N + 1):
        rest = _compositions(k - 1, N - first)
        parts.append(np.hstack([np.full((rest.shape[0], 1), float(first)), rest]))
    return np.vstack(parts)


def _steps(resolution):
    return max(1, int(round(1.0 / resolution)))


def _binary_oracle(K, kind, resolution):
    if K.n_in > 5:
        raise AlphabetTooLarge("binary-pair brute force is limited to 5 inputs")
    g = np.linspace(0.0, 1.0, _steps(resolution) + 1)
    P, Q = (a.ravel() for a in np.meshgrid(g, g, indexing="ij"))
    # the grid is symmetric under p -> 1-p, q -> 1-q, so unordered pairs suffice
    din = naive_divergence(np.stack([P, 1 - P], 1), np.stack([Q, 1 - Q], 1), kind)
    best, cert = 0.0, None
    for x, xp in itertools.combinations(range(K.n_in), 2):
        a, b = K.rows[x], K.rows[xp]
        dout = naive_divergence(np.outer(P, a) + np.outer(1 - P, b), np.outer(Q, a) + np.outer(1 - Q, b), kind)
        ok = (din > MIN_DIV) & np.isfinite(din)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.where(ok, dout / np.where(ok, din, 1.0), -np.inf)
        i = int(np.argmax(r))
        if r[i] > best:
            best = float(r[i])
            nu, mu = np.zeros(K.n_in), np.zeros(K.n_in)
            nu[[x, xp]] = P[i], 1 - P[i]
            mu[[x, xp]] = Q[i], 1 - Q[i]
            cert = PairOfMeasures(ProbabilityMeasure(nu), ProbabilityMeasure(mu))
    return lower(best, cert, Method.BOUNDARY_BRUTE_FORCE, kind, resolution=resolution)


def _radius_scan(mu, K, resolution):
    """Order-infinity constant at ``mu`` by scanning the radius ``t = D_inf(nu||mu)``.

    For a fixed radius the best output ratio at ``y`` is a linear program over
    ``{nu : nu <= e^t mu}``, solved exactly by the fractional-knapsack greedy.
    Radii run over a geometric grid with relative step ``resolution``.
    """
    w = mu.weights
    supp = np.flatnonzero(w > 0)
    muK = w @ K.rows
    t_max = -math.log(w[supp].min())
    n_t = int(math.ceil(math.log(1e-6) / math.log1p(-resolution)))
    ts = t_max * (1 - resolution) ** np.arange(n_t)
    ts = ts[ts > 0]
    s = np.exp(ts)
    best, arg = -np.inf, None
    for y in np.flatnonzero(muK > 0):
        col = K.rows[supp, y]
        order = np.argsort(-col, kind="stable")
        mu_sorted, col_sorted = w[supp][order], col[order]
        P = np.concatenate([[0.0], np.cumsum(mu_sorted)])
        S = np.concatenate([[0.0], np.cumsum(mu_sorted * col_sorted)])
        # number of items filled to capacity e^t mu(x)
        k = np.clip(np.searchsorted(P, 1.0 / s, side="right") - 1, 0, supp.size - 1)
        value = s * S[k] + (1.0 - s * P[k]) * col_sorted[k]
        with np.errstate(divide="ignore"):
            r = np.log(value / muK[y]) / ts
        i = int(np.argmax(r))
        if r[i] > best:
            best, arg = float(r[i]), (y, ts[i], order, k[i])
    y, t, order, k = arg
    nu = np.zeros(mu.n)
    cap = math.exp(t) * w[supp][order]
    filled = np.minimum(cap, np.maximum(0.0, 1.0 - np.concatenate([[0.0], np.cumsum(cap)[:-1]])))
    nu[supp[order]] = filled
    nu = nu / nu.sum()
    cert = PairOfMeasures(ProbabilityMeasure(nu), mu)
    return lower(best, cert, Method.RADIUS_SCAN, None, resolution=resolution, radius=float(t), output=int(y))


def brute_force_eta(mu: ProbabilityMeasure | None, K: MarkovKernel, kind: DivergenceKind, resolution: float = 1e-3):
    """Grid ground truth for ``eta_D(K)`` (``mu=None``) or ``eta_D(mu, K)``.

    * ``mu=None``: all binary pairs with weights on the grid ``{0, h, ..., 1}``.
    * Rényi order infinity at ``mu``: radius scan with exact inner knapsack.
    * chi-squared, TV and L-infinity at ``mu``: their ratios are constant along
      rays from ``mu``, so the proper faces of the simplex are gridded.
    * anything else at ``mu``: the full simplex grid (at most 3 inputs).
    """
    if mu is None:
        return _binary_oracle(K, kind, resolution)
    if mu.n != K.n_in:
        raise DimensionMismatch("measure and kernel sizes differ")
    supp = mu.support
    if supp.size < 2:
        raise DegenerateMeasure("reference measure must charge at least two points")
    if kind.family == "renyi" and math.isinf(kind.alpha):
        est = _radius_scan(mu, K, resolution)
        return lower(est.value, est.certificate, est.method, kind, **est.details)

    N = _steps(resolution)
    m = supp.size
    if kind.family in ("chi2", "tv", "linf"):
        if K.n_in > 4:
            raise AlphabetTooLarge("boundary brute force is limited to 4 inputs")
        faces = list(itertools.combinations(range(m), m - 1))
        if m == 2:
            faces = [(0,), (1,)]
    else:
        if K.n_in > 3:
            raise AlphabetTooLarge("full-simplex brute force is limited to 3 inputs")
        faces = [tuple(range(m))]
    best, cert = 0.0, None
    for face in faces:
        g = simplex_grid(len(face), N)
        pts = np.zeros((g.shape[0], mu.n))
        pts[:, supp[list(face)]] = g
        r = _ratios(pts, mu.weights, K, kind)
        i = int(np.argmax(r))
        if r[i] > best:
            best = float(r[i])
            cert = PairOfMeasures(ProbabilityMeasure(pts[i]), mu)
    return lower(best, cert, Method.BOUNDARY_BRUTE_FORCE, kind, resolution=resolution)
