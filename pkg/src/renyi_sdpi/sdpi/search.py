"""Searches for contraction constants that have no closed form.

Distribution-dependent constants are searched over the probability simplex
on ``supp(mu)``, split into faces. On a face ``A`` a point is written as
``nu ∝ mu * exp(z)`` (last coordinate of ``z`` pinned to 0), so ``z = 0`` is
the restriction ``mu_A``. Every face center and every "pair transfer"
(the mass of ``x'`` moved onto ``x``) is evaluated exactly, and seeded
Nelder-Mead runs then explore the faces that matter for the divergence:

* ray-invariant kinds (chi-squared, TV, L-infinity) and the Rényi orders 2
  and infinity only look at proper faces, because their supremum sits on the
  boundary;
* every other kind also searches the full face.

Distribution-independent constants use the two-point reduction: scan a
logit grid of binary pairs for each pair of rows, then polish the best cells.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from .. import _backend
from ..divergences import (
    CHI2,
    LINF,
    RENYI_INF,
    RENYI_ZERO,
    DivergenceKind,
    Renyi,
    divergence_from_logs,
)
from ..errors import DegenerateMeasure, DimensionMismatch, UnsupportedKind
from ..measures import MarkovKernel, ProbabilityMeasure
from .closed_form import eta_chi2_dd, eta_infty_kernel, eta_tv_kernel
from .estimate import (
    BinaryPair,
    LogOnePlus,
    Method,
    PairOfMeasures,
    SdpiEstimate,
    SearchConfig,
    clamp01,
    exact,
    lower,
)

MIN_DIV = 1e-12
LOGIT_LIMIT = 1e8
CHI2_LOGIT_LIMIT = 30.0


def _local_chi2_applies(kind: DivergenceKind) -> bool:
    # smooth divergences behave like a multiple of chi-squared near nu = mu
    if kind.family in ("kl", "hellinger", "chi2"):
        return True
    return kind.family == "renyi" and 0 < kind.alpha < math.inf


def _boundary_only(kind: DivergenceKind) -> bool:
    if kind.family in ("chi2", "tv", "linf"):
        return True
    return kind.family == "renyi" and kind.alpha in (0.0, 2.0, math.inf)


class _Setup:
    """``mu`` and ``K`` restricted to ``supp(mu)`` x ``supp(mu K)``, in logs."""

    def __init__(self, mu: ProbabilityMeasure, K: MarkovKernel):
        if mu.n != K.n_in:
            raise DimensionMismatch(f"measure has {mu.n} points, kernel expects {K.n_in}")
        self.n = mu.n
        self.supp = mu.support
        if self.supp.size < 2:
            raise DegenerateMeasure("reference measure must charge at least two points")
        w = mu.weights[self.supp]
        rows = K.rows[self.supp]
        muK = w @ rows
        out = np.flatnonzero(muK > 0)
        with np.errstate(divide="ignore"):
            self.log_mu = np.log(w)
            self.logK = np.log(rows[:, out])
        self.log_muK = np.log(muK[out])
        self.m = self.supp.size
        self.mu = mu

    def divergences(self, lnu, code, alpha):
        """``(D(nu||mu), D(nuK||muK))`` for a batch of log-weight rows."""
        lnu = np.atleast_2d(lnu)
        din = divergence_from_logs(lnu, self.log_mu[None, :], code, alpha)
        with np.errstate(invalid="ignore"):
            lnuK = logsumexp(lnu[:, :, None] + self.logK[None, :, :], axis=1)
        dout = divergence_from_logs(lnuK, self.log_muK[None, :], code, alpha)
        return np.atleast_1d(din), np.atleast_1d(dout)

    def ratios(self, lnu, code, alpha):
        din, dout = self.divergences(lnu, code, alpha)
        ok = (din > MIN_DIV) & (din < np.inf)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(ok, dout / np.where(ok, din, 1.0), np.nan)

    def lnu_from_z(self, face, z):
        w = self.log_mu[face] + np.append(z, 0.0)
        lnu = np.full(self.m, -np.inf)
        lnu[face] = w - logsumexp(w)
        return lnu

    def measure(self, lnu) -> ProbabilityMeasure:
        w = np.zeros(self.n)
        w[self.supp] = np.exp(lnu)
        return ProbabilityMeasure(w / w.sum())


def _faces(m: int, include_full: bool, limit: int):
    top = m if include_full else m - 1
    if m <= limit:
        sizes = range(1, top + 1)
    else:
        sizes = sorted({s for s in (1, 2, m - 2, m - 1, top) if 1 <= s <= top})
    for s in sizes:
        yield from (np.array(c, dtype=np.intp) for c in itertools.combinations(range(m), s))


def _centers(setup: _Setup, faces):
    out = []
    for A in faces:
        lnu = np.full(setup.m, -np.inf)
        lnu[A] = setup.log_mu[A] - logsumexp(setup.log_mu[A])
        out.append(lnu)
    return out


def _transfers(setup: _Setup):
    out = []
    for x, xp in itertools.permutations(range(setup.m), 2):
        lnu = setup.log_mu.copy()
        lnu[x] = np.logaddexp(lnu[x], lnu[xp])
        lnu[xp] = -np.inf
        out.append(lnu)
    return out


def _nelder_mead_candidates(setup: _Setup, kind: DivergenceKind, config: SearchConfig):
    code, alpha = kind.code
    m = setup.m
    faces = []
    if not _boundary_only(kind):
        faces.append(np.arange(m, dtype=np.intp))
    if m - 1 >= 2:
        faces.extend(np.array(c, dtype=np.intp) for c in itertools.combinations(range(m), m - 1))
    if not faces or code == RENYI_ZERO:
        return []
    visited = set()
    out = []
    for r in range(config.restarts):
        fi = r % len(faces)
        face = faces[fi]
        k = face.size
        if fi not in visited and k < m:
            z0 = np.zeros(k - 1)
        else:
            z0 = np.random.default_rng([config.seed, r]).normal(0.0, 1.5, k - 1)
        visited.add(fi)
        z, _, _ = _backend.kernels.nelder_mead_face(
            z0, config.step, face, setup.log_mu, setup.logK, setup.log_muK,
            code, alpha, config.fatol, config.xatol, config.fev_limit(k - 1))
        out.append(setup.lnu_from_z(face, z))
    return out


def _candidates(setup: _Setup, kind: DivergenceKind, config: SearchConfig):
    faces = list(_faces(setup.m, not _boundary_only(kind), config.max_enumerated_support))
    cands = _centers(setup, faces) + _transfers(setup) + _nelder_mead_candidates(setup, kind, config)
    return np.array(cands)


def _constant_rows(rows) -> bool:
    # every input yields the same output law, so every output divergence is 0
    return bool(np.all(rows == rows[0]))


def _best(values):
    if values.size == 0 or np.all(np.isnan(values)):
        return -1, 0.0
    i = int(np.nanargmax(values))
    return i, float(values[i])


def eta_dd(mu: ProbabilityMeasure, K: MarkovKernel, kind: DivergenceKind, config: SearchConfig | None = None):
    """Distribution-dependent contraction constant ``eta_D(mu, K)``, from below.

    The value is the best ratio among all evaluated candidates, raised to the
    spectral chi-squared constant for divergences that are locally
    chi-squared (the ratio tends to it as ``nu -> mu``). For order infinity
    the L-infinity constant plays that role. The certificate is the
    maximizing pair, or ``None`` when the local limit wins.
    """
    config = config or SearchConfig()
    setup = _Setup(mu, K)
    if _constant_rows(K.rows[mu.support]):
        return exact(0.0, None, Method.CLOSED_FORM, kind)
    code, alpha = kind.code
    cands = _candidates(setup, kind, config)
    vals = setup.ratios(cands, code, alpha)
    i, best = _best(vals)
    cert = PairOfMeasures(setup.measure(cands[i]), mu) if i >= 0 else None
    details = {"n_candidates": int(cands.shape[0])}

    local = None
    if _local_chi2_applies(kind):
        local = eta_chi2_dd(mu, K).value
    elif kind.family == "renyi" and alpha == math.inf:
        local = eta_dd(mu, K, LINF, config).value
    if local is not None:
        details["local_limit"] = local
        if local > best:
            method = Method.SIMPLEX_SEARCH if code == RENYI_INF else Method.SPECTRAL
            return lower(local, None, method, kind, **details)
    return lower(best, cert, Method.SIMPLEX_SEARCH, kind, **details)


# --- distribution-independent constants ------------------------------------

def logit_grid(size: int, limit: float = LOGIT_LIMIT):
    """Symmetric grid, uniform in ``t`` with logit ``sign(t) * expm1(|t|)``.

    Dense around 0 and reaching ``+-limit``, i.e. weights as small as
    ``exp(-limit)``; returns ``(t, logits)``.
    """
    T = math.log1p(limit)
    t = np.linspace(-T, T, size)
    return t, np.sign(t) * np.expm1(np.abs(t))


def _t_to_logit(t):
    return math.copysign(math.expm1(abs(t)), t)


def _row_pairs(K: MarkovKernel):
    for x, xp in itertools.combinations(range(K.n_in), 2):
        a, b = K.rows[x], K.rows[xp]
        if np.array_equal(a, b):
            continue
        keep = (a + b) > 0
        with np.errstate(divide="ignore"):
            yield x, xp, np.log(a[keep]), np.log(b[keep])


def _polish(la, lb, tp, tq, dt, T, code, alpha, rounds):
    kern = _backend.kernels

    def ratio(tp_, tq_):
        r = kern.binary_ratio(la, lb, _t_to_logit(tp_), _t_to_logit(tq_), code, alpha)
        # ratios are >= 0, so 0 marks excluded points without feeding inf to Brent
        return 0.0 if math.isnan(r) else r

    best = ratio(tp, tq)
    for _ in range(rounds):
        for which in (0, 1):
            c = tp if which == 0 else tq
            lo, hi = max(-T, c - dt), min(T, c + dt)
            f = (lambda s: -ratio(s, tq)) if which == 0 else (lambda s: -ratio(tp, s))
            res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            if -res.fun > best:
                best = -res.fun
                if which == 0:
                    tp = res.x
                else:
                    tq = res.x
    return best, tp, tq


def binary_pair_search(K: MarkovKernel, kind: DivergenceKind, grid: int, refine_rounds: int, top: int = 4):
    """Best ratio over two-point pairs; returns ``(value, BinaryPair or None)``."""
    code, alpha = kind.code
    t, logits = logit_grid(grid)
    T, dt = float(t[-1]), float(t[1] - t[0])
    hits = []
    for x, xp, la, lb in _row_pairs(K):
        r, i, j = _backend.kernels.binary_scan(la, lb, logits, code, alpha)
        if i >= 0:
            hits.append((r, x, xp, la, lb, i, j))
    if not hits:
        return 0.0, None
    hits.sort(key=lambda h: -h[0])
    best, cert = -math.inf, None
    for r, x, xp, la, lb, i, j in hits[:top]:
        v, tp, tq = _polish(la, lb, float(t[i]), float(t[j]), dt, T, code, alpha, refine_rounds)
        if v > best:
            best = v
            cert = BinaryPair(x, xp, _t_to_logit(tp), _t_to_logit(tq))
    return best, cert


def _chi2_pair_curve(a, b, logits):
    keep = (a + b) > 0
    a, b = a[keep], b[keep]
    l = np.asarray(logits, dtype=float)[:, None]
    return ((a - b) ** 2 / (a * (1 + np.exp(l)) + b * (1 + np.exp(-l)))).sum(axis=1)


def eta_chi2_kernel(K: MarkovKernel, config: SearchConfig | None = None):
    """Distribution-independent chi-squared constant via two-point inputs.

    For ``nu, mu`` on ``{x, x'}`` the ratio does not depend on ``nu``:
    ``q (1-q) sum_y (a_y - b_y)^2 / (q a_y + (1-q) b_y)`` with ``a, b`` the two
    rows and ``q = mu(x)``. It is maximized over a logit grid and polished.
    """
    config = config or SearchConfig()
    logits = np.linspace(-CHI2_LOGIT_LIMIT, CHI2_LOGIT_LIMIT, config.grid)
    dl = float(logits[1] - logits[0])
    best, cert = 0.0, None
    for x, xp in itertools.combinations(range(K.n_in), 2):
        a, b = K.rows[x], K.rows[xp]
        if np.array_equal(a, b):
            continue
        curve = _chi2_pair_curve(a, b, logits)
        i = int(np.argmax(curve))
        lo, hi = max(-CHI2_LOGIT_LIMIT, logits[i] - dl), min(CHI2_LOGIT_LIMIT, logits[i] + dl)
        res = minimize_scalar(lambda l: -_chi2_pair_curve(a, b, [l])[0], bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12})
        lq, v = (float(res.x), -float(res.fun)) if -res.fun > curve[i] else (float(logits[i]), float(curve[i]))
        if v > best:
            best = v
            # the ratio ignores nu; any nu != mu on the pair certifies it
            lp = lq + 2.0 if lq < 0 else lq - 2.0
            cert = BinaryPair(x, xp, lp, lq)
    return lower(best, cert, Method.BINARY_PAIR_SEARCH, CHI2)


def eta_di(K: MarkovKernel, kind: DivergenceKind, config: SearchConfig | None = None):
    """Distribution-independent contraction constant ``eta_D(K)``.

    * TV and Rényi order infinity: closed forms over row pairs.
    * Rényi orders in ``[0, 1]`` (KL included): equal to the chi-squared
      constant; optionally cross-checked against a two-point Rényi search,
      reported under ``details``.
    * Rényi orders in ``(1, inf)`` and Hellinger: two-point search.
    * chi-squared: the one-dimensional two-point formula.
    """
    config = config or SearchConfig()
    fam, alpha = kind.family, kind.alpha
    if fam == "tv":
        return eta_tv_kernel(K)
    if fam == "linf":
        raise UnsupportedKind("no reduction is available for the L-infinity divergence over all inputs")
    if _constant_rows(K.rows):
        return exact(0.0, None, Method.CLOSED_FORM, kind)
    if fam == "chi2":
        return eta_chi2_kernel(K, config)
    if fam == "renyi" and alpha == math.inf:
        return eta_infty_kernel(K)
    if fam == "kl" or (fam == "renyi" and alpha <= 1):
        chi2 = eta_chi2_kernel(K, config)
        details = {}
        if config.crosscheck:
            v, _ = binary_pair_search(K, kind, config.crosscheck_grid, 0)
            details = {"crosscheck_value": clamp01(v), "crosscheck_ok": bool(v <= chi2.value + 1e-6)}
        return SdpiEstimate(chi2.value, chi2.certificate, Method.CLOSED_FORM,
                            chi2.value, 1.0, kind, details)
    value, cert = binary_pair_search(K, kind, config.grid, config.refine_rounds)
    return lower(value, cert, Method.BINARY_PAIR_SEARCH, kind)


# --- transformed divergences ------------------------------------------------

def _transformed_kind(base: DivergenceKind, g):
    if not isinstance(g, LogOnePlus):
        return None
    if base.family == "hellinger" and math.isclose(g.scale, base.alpha - 1, rel_tol=1e-12):
        return Renyi(base.alpha)
    if base.family == "chi2" and math.isclose(g.scale, 1.0, rel_tol=1e-12):
        return Renyi(2)
    return None


def transformed_sdpi_compare(mu: ProbabilityMeasure, K: MarkovKernel, base: DivergenceKind, g,
                             config: SearchConfig | None = None):
    """Estimate ``eta_D(mu, K)`` and ``eta_{g o D}(mu, K)`` on one candidate set.

    Both ratios are evaluated on the union of the candidates produced by
    searching either objective, so the pointwise ordering forced by the
    convexity of ``g`` carries over to the two maxima. Returns
    ``(eta_base, eta_transformed)``.
    """
    config = config or SearchConfig()
    code, alpha = base.code
    if code == RENYI_ZERO:
        raise UnsupportedKind("the order-0 Rényi divergence has no meaningful transform")
    setup = _Setup(mu, K)
    if _constant_rows(K.rows[mu.support]):
        return 0.0, 0.0
    cands = [_candidates(setup, base, config)]
    tkind = _transformed_kind(base, g)
    if tkind is not None:
        cands.append(_nelder_mead_candidates(setup, tkind, config) or np.empty((0, setup.m)))
    cands = np.vstack([np.atleast_2d(c) for c in cands if len(c)])
    din, dout = setup.divergences(cands, code, alpha)
    gin, gout = g(din), g(dout)
    ok = (din > MIN_DIV) & (din < np.inf) & (gin > 0) & (gin < np.inf)
    with np.errstate(invalid="ignore", divide="ignore"):
        rb = np.where(ok, dout / np.where(ok, din, 1.0), np.nan)
        rt = np.where(ok, gout / np.where(ok, gin, 1.0), np.nan)
    _, eta_b = _best(rb)
    _, eta_t = _best(rt)
    if _local_chi2_applies(base):
        c = eta_chi2_dd(mu, K).value
        eta_b = max(eta_b, c)
        eta_t = max(eta_t, g.local_ratio(c))
    return clamp01(eta_b), clamp01(eta_t)
