"""Pure numpy implementation of the compiled kernels in ``_core.pyx``.

Signatures and return conventions match the extension one for one. This
module is selected when the extension is missing or ``SDPI_FORCE_PYTHON=1``.
"""
from __future__ import annotations

import numpy as np

from .divergences import divergence_from_logs

MIN_DIV = 1e-12


def _log_sigmoid(l):
    l = np.asarray(l, dtype=float)
    with np.errstate(over="ignore"):
        return np.where(l >= 0, -np.log1p(np.exp(-np.abs(l))), l - np.log1p(np.exp(-np.abs(l))))


def divergence_logs(lp, lq, code, alpha=0.0, outside=0.0):
    return float(divergence_from_logs(lp, lq, code, alpha, outside))


class _Face:
    def __init__(self, face, log_mu, logK, log_muK, code, alpha):
        self.face = np.asarray(face, dtype=np.intp)
        self.log_mu = np.asarray(log_mu, dtype=float)
        self.logK = np.asarray(logK, dtype=float)
        self.log_muK = np.asarray(log_muK, dtype=float)
        if self.logK.shape != (self.log_mu.size, self.log_muK.size):
            raise ValueError("kernel shape does not match the supports")
        self.code = code
        self.alpha = alpha
        self.logK_face = self.logK[self.face]

    def ratio(self, z):
        w = self.log_mu[self.face] + np.append(z, 0.0)
        w = w - np.logaddexp.reduce(w)
        lnu = np.full(self.log_mu.size, -np.inf)
        lnu[self.face] = w
        din = divergence_from_logs(lnu, self.log_mu, self.code, self.alpha)
        if not (MIN_DIV < din < np.inf):
            return np.nan
        with np.errstate(invalid="ignore"):
            lnuK = np.logaddexp.reduce(w[:, None] + self.logK_face, axis=0)
        dout = divergence_from_logs(lnuK, self.log_muK, self.code, self.alpha)
        return float(dout / din)

    def objective(self, z):
        r = self.ratio(z)
        return np.inf if np.isnan(r) else -r


def face_ratio(z, face, log_mu, logK, log_muK, code, alpha):
    F = _Face(face, log_mu, logK, log_muK, code, alpha)
    z = np.asarray(z, dtype=float)
    if z.size != F.face.size - 1:
        raise ValueError("z must have one entry fewer than the face")
    return F.ratio(z)


def nelder_mead_face(z0, step, face, log_mu, logK, log_muK, code, alpha, fatol, xatol, maxfev):
    F = _Face(face, log_mu, logK, log_muK, code, alpha)
    N = F.face.size - 1
    if N < 1:
        raise ValueError("face must hold at least two points")
    rho, chi, psi, sigma = 1.0, 2.0, 0.5, 0.5
    x0 = np.asarray(z0, dtype=float)
    sim = np.tile(x0, (N + 1, 1))
    for i in range(N):
        sim[i + 1, i] += step
    fsim = np.array([F.objective(v) for v in sim])
    fcalls = N + 1
    order = np.argsort(fsim, kind="stable")
    sim, fsim = sim[order], fsim[order]

    while fcalls < maxfev:
        with np.errstate(invalid="ignore"):
            spread = np.max(np.abs(fsim[0] - fsim[1:]))
        if np.max(np.abs(sim[1:] - sim[0])) <= xatol and spread <= fatol:
            break
        xbar = sim[:-1].sum(axis=0) / N
        xr = (1 + rho) * xbar - rho * sim[-1]
        fxr = F.objective(xr)
        fcalls += 1
        shrink = False
        if fxr < fsim[0]:
            xe = (1 + rho * chi) * xbar - rho * chi * sim[-1]
            fxe = F.objective(xe)
            fcalls += 1
            if fxe < fxr:
                sim[-1], fsim[-1] = xe, fxe
            else:
                sim[-1], fsim[-1] = xr, fxr
        elif fxr < fsim[-2]:
            sim[-1], fsim[-1] = xr, fxr
        elif fxr < fsim[-1]:
            xc = (1 + psi * rho) * xbar - psi * rho * sim[-1]
            fxc = F.objective(xc)
            fcalls += 1
            if fxc <= fxr:
                sim[-1], fsim[-1] = xc, fxc
            else:
                shrink = True
        else:
            xcc = (1 - psi) * xbar + psi * sim[-1]
            fxcc = F.objective(xcc)
            fcalls += 1
            if fxcc < fsim[-1]:
                sim[-1], fsim[-1] = xcc, fxcc
            else:
                shrink = True
        if shrink:
            for j in range(1, N + 1):
                sim[j] = sim[0] + sigma * (sim[j] - sim[0])
                fsim[j] = F.objective(sim[j])
                fcalls += 1
        order = np.argsort(fsim, kind="stable")
        sim, fsim = sim[order], fsim[order]
    return sim[0].copy(), float(fsim[0]), fcalls


def _binary_tables(la, lb, logits):
    s1 = _log_sigmoid(logits)
    s0 = _log_sigmoid(-np.asarray(logits, dtype=float))
    T = np.logaddexp(s1[:, None] + la[None, :], s0[:, None] + lb[None, :])
    return s1, s0, T


def binary_scan(la, lb, logits, code, alpha):
    la = np.asarray(la, dtype=float)
    lb = np.asarray(lb, dtype=float)
    g = np.asarray(logits, dtype=float)
    s1, s0, T = _binary_tables(la, lb, g)
    G = g.size
    nu2 = np.stack([s1, s0], axis=1)
    best, bi, bj = -np.inf, -1, -1
    for i in range(G):
        # row i: nu fixed, mu runs over the grid
        din = divergence_from_logs(nu2[i][None, :], nu2, code, alpha)
        dout = divergence_from_logs(T[i][None, :], T, code, alpha)
        ok = (din > MIN_DIV) & (din < np.inf)
        ok[i] = False
        if not ok.any():
            continue
        r = np.where(ok, dout / np.where(ok, din, 1.0), -np.inf)
        j = int(np.argmax(r))
        if r[j] > best:
            best, bi, bj = float(r[j]), i, j
    return best, bi, bj


def binary_ratio(la, lb, lp_logit, lq_logit, code, alpha):
    la = np.asarray(la, dtype=float)
    lb = np.asarray(lb, dtype=float)
    s1, s0, T = _binary_tables(la, lb, np.array([lp_logit, lq_logit], dtype=float))
    din = divergence_from_logs([s1[0], s0[0]], [s1[1], s0[1]], code, alpha)
    if not (MIN_DIV < din < np.inf):
        return np.nan
    dout = divergence_from_logs(T[0], T[1], code, alpha)
    return float(dout / din)


def subset_scan(mu_s, K_s, chunk=1 << 14):
    mu = np.asarray(mu_s, dtype=float)
    K = np.asarray(K_s, dtype=float)
    m = mu.size
    if not 2 <= m <= 62:
        raise ValueError("support size must lie in [2, 62]")
    joint = mu[:, None] * K
    bits = 1 << np.arange(m, dtype=np.int64)
    best, best_mask = -np.inf, -1
    last = (1 << m) - 1
    for start in range(1, last, chunk):
        masks = np.arange(start, min(start + chunk, last), dtype=np.int64)
        inA = (masks[:, None] & bits[None, :]) != 0
        a = inA.astype(float) @ mu
        c = (~inA).astype(float) @ mu
        SA = inA.astype(float) @ joint
        SC = (~inA).astype(float) @ joint
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(SA > 0, np.log1p(SC / SA), np.inf)
        r = 1.0 - v.min(axis=1) / np.log1p(c / a)
        k = int(np.argmax(r))
        if r[k] > best:
            best, best_mask = float(r[k]), int(masks[k])
    return best, best_mask
