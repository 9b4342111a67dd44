# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the contraction-ratio searches.

Every function here has a line-for-line numpy twin in ``_fallback.py``; the
two are kept interchangeable so either can back the public API.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, expm1, fabs, INFINITY, NAN, isnan, sqrt

cnp.import_array()

cdef enum:
    RENYI = 0
    KL = 1
    RENYI_INF = 2
    HELLINGER = 3
    TV = 4
    LINF = 5
    RENYI_ZERO = 6

cdef double SMALL_LOG = 0.1
cdef double BIG_EXP = 30.0
cdef double MIN_DIV = 1e-12


cdef inline double _lse(const double* x, Py_ssize_t n) noexcept nogil:
    cdef double m = -INFINITY, s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        if x[i] > m:
            m = x[i]
    if m == -INFINITY or m == INFINITY:
        return m
    for i in range(n):
        s += exp(x[i] - m)
    return m + log(s)


cdef inline double _logaddexp(double a, double b) noexcept nogil:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a > b:
        return a + log1p(exp(b - a))
    return b + log1p(exp(a - b))


cdef inline double _log_sigmoid(double l) noexcept nogil:
    if l >= 0:
        return -log1p(exp(-l))
    return l - log1p(exp(l))


cdef double _div(const double* lp, const double* lq, Py_ssize_t n, int code,
                 double alpha, double outside, double* work) noexcept nogil:
    """Divergence from log-weights; ``work`` needs room for ``n`` doubles."""
    cdef Py_ssize_t i
    cdef double d = 0.0, l, m, s, mu, nu, a, L, t
    cdef bint on, anyon
    if code == RENYI_INF or code == LINF:
        if outside > 0:
            return INFINITY
        m = -INFINITY
        for i in range(n):
            if lp[i] > -INFINITY:
                l = lp[i] - lq[i]
                if l > m:
                    m = l
        d = expm1(m) if code == LINF else m
    elif code == RENYI_ZERO:
        s = 0.0
        m = -INFINITY
        anyon = False
        for i in range(n):
            if lp[i] > -INFINITY:
                anyon = True
                m = _logaddexp(m, lq[i])
            else:
                s += exp(lq[i])
        if not anyon:
            return INFINITY
        # when most mass is missing, 1 - s loses every digit
        d = -m if s > 0.5 else -log1p(-s)
    elif code == TV:
        s = 0.0
        for i in range(n):
            mu = exp(lq[i])
            if lp[i] > -INFINITY:
                l = lp[i] - lq[i]
                if l > BIG_EXP:
                    s += fabs(exp(lp[i]) - mu)
                else:
                    s += fabs(mu * expm1(l))
            else:
                s += mu
        d = 0.5 * (s + outside)
    elif code == KL:
        if outside > 0:
            return INFINITY
        s = 0.0
        for i in range(n):
            mu = exp(lq[i])
            if lp[i] > -INFINITY:
                l = lp[i] - lq[i]
                nu = exp(lp[i])
                if l > BIG_EXP:
                    s += nu * l - nu + mu
                else:
                    s += nu * l - mu * expm1(l)
            else:
                s += mu
        d = s
    elif code == RENYI or code == HELLINGER:
        if alpha > 1 and outside > 0:
            return INFINITY
        s = 0.0
        for i in range(n):
            mu = exp(lq[i])
            if lp[i] > -INFINITY:
                l = lp[i] - lq[i]
                a = alpha * l
                work[i] = lq[i] + a
                if a > BIG_EXP:
                    s += exp(work[i]) - (1 - alpha) * mu - alpha * exp(lp[i])
                else:
                    s += mu * (expm1(a) - alpha * expm1(l))
            else:
                work[i] = -INFINITY
                s += mu * (alpha - 1)
        s -= alpha * outside
        L = _lse(work, n)
        if fabs(L) < SMALL_LOG:
            d = log1p(s) if code == RENYI else s
        else:
            d = L if code == RENYI else expm1(L)
        d = d / (alpha - 1)
    else:
        return NAN
    if d > 0:
        return d
    return 0.0


def divergence_logs(double[::1] lp, double[::1] lq, int code, double alpha=0.0, double outside=0.0):
    """Divergence of one pair of log-weight vectors (see the numpy twin)."""
    cdef Py_ssize_t n = lp.shape[0]
    if lq.shape[0] != n:
        raise ValueError("length mismatch")
    cdef double[::1] work = np.empty(max(n, 1))
    return _div(&lp[0], &lq[0], n, code, alpha, outside, &work[0])


# --- face-restricted contraction ratio -------------------------------------

cdef struct FaceProblem:
    Py_ssize_t k          # face size
    Py_ssize_t m          # support size of mu
    Py_ssize_t ny         # support size of muK
    const Py_ssize_t* face
    const double* log_mu
    const double* logK    # m x ny, row-major
    const double* log_muK
    int code
    double alpha
    double* lnu           # m
    double* lnuK          # ny
    double* tmp           # max(k, m, ny)


cdef double _face_ratio(FaceProblem* P, const double* z) noexcept nogil:
    cdef Py_ssize_t i, x, y, k = P.k
    cdef double L, din, dout
    for i in range(k):
        P.tmp[i] = P.log_mu[P.face[i]] + (z[i] if i < k - 1 else 0.0)
    L = _lse(P.tmp, k)
    for x in range(P.m):
        P.lnu[x] = -INFINITY
    for i in range(k):
        P.lnu[P.face[i]] = P.tmp[i] - L
    din = _div(P.lnu, P.log_mu, P.m, P.code, P.alpha, 0.0, P.tmp)
    if not (din > MIN_DIV and din < INFINITY):
        return NAN
    for y in range(P.ny):
        for i in range(k):
            x = P.face[i]
            P.tmp[i] = P.lnu[x] + P.logK[x * P.ny + y]
        P.lnuK[y] = _lse(P.tmp, k)
    dout = _div(P.lnuK, P.log_muK, P.ny, P.code, P.alpha, 0.0, P.tmp)
    return dout / din


cdef inline double _objective(FaceProblem* P, const double* z) noexcept nogil:
    cdef double r = _face_ratio(P, z)
    if isnan(r):
        return INFINITY
    return -r


cdef class _Face:
    cdef FaceProblem P
    cdef Py_ssize_t[::1] face
    cdef double[::1] log_mu, log_muK, lnu, lnuK, tmp
    cdef double[:, ::1] logK

    def __init__(self, face, log_mu, logK, log_muK, int code, double alpha):
        self.face = np.ascontiguousarray(face, dtype=np.intp)
        self.log_mu = np.ascontiguousarray(log_mu, dtype=float)
        self.logK = np.ascontiguousarray(logK, dtype=float)
        self.log_muK = np.ascontiguousarray(log_muK, dtype=float)
        m = self.log_mu.shape[0]
        ny = self.log_muK.shape[0]
        k = self.face.shape[0]
        if self.logK.shape[0] != m or self.logK.shape[1] != ny:
            raise ValueError("kernel shape does not match the supports")
        self.lnu = np.empty(m)
        self.lnuK = np.empty(ny)
        self.tmp = np.empty(max(k, m, ny))
        self.P.k = k
        self.P.m = m
        self.P.ny = ny
        self.P.face = &self.face[0]
        self.P.log_mu = &self.log_mu[0]
        self.P.logK = &self.logK[0, 0]
        self.P.log_muK = &self.log_muK[0]
        self.P.code = code
        self.P.alpha = alpha
        self.P.lnu = &self.lnu[0]
        self.P.lnuK = &self.lnuK[0]
        self.P.tmp = &self.tmp[0]


def face_ratio(z, face, log_mu, logK, log_muK, int code, double alpha):
    """Contraction ratio at ``nu ∝ mu * exp(z)`` on ``face``; NaN if excluded."""
    cdef _Face F = _Face(face, log_mu, logK, log_muK, code, alpha)
    cdef double[::1] zz = np.ascontiguousarray(z, dtype=float)
    if zz.shape[0] != F.P.k - 1:
        raise ValueError("z must have one entry fewer than the face")
    if zz.shape[0] == 0:
        return _face_ratio(&F.P, NULL)
    return _face_ratio(&F.P, &zz[0])


cdef void _sort_simplex(double[:, ::1] sim, double[::1] fsim, Py_ssize_t N,
                        double[::1] rowbuf) noexcept nogil:
    # stable insertion sort of the N+1 vertices by objective value
    cdef Py_ssize_t i, j, c
    cdef double fk
    for i in range(1, N + 1):
        fk = fsim[i]
        for c in range(N):
            rowbuf[c] = sim[i, c]
        j = i - 1
        while j >= 0 and fsim[j] > fk:
            fsim[j + 1] = fsim[j]
            for c in range(N):
                sim[j + 1, c] = sim[j, c]
            j -= 1
        fsim[j + 1] = fk
        for c in range(N):
            sim[j + 1, c] = rowbuf[c]


def nelder_mead_face(z0, double step, face, log_mu, logK, log_muK, int code,
                     double alpha, double fatol, double xatol, Py_ssize_t maxfev):
    """Minimize ``-ratio`` over ``z`` with the classic Nelder-Mead moves.

    Coefficients and the stopping rule follow scipy's implementation
    (reflection 1, expansion 2, contraction 1/2, shrink 1/2; stop once both
    the simplex diameter and the spread of values are within tolerance).
    Returns ``(z_best, f_best, n_evaluations)``.
    """
    cdef _Face F = _Face(face, log_mu, logK, log_muK, code, alpha)
    cdef Py_ssize_t N = F.P.k - 1
    if N < 1:
        raise ValueError("face must hold at least two points")
    cdef double[:, ::1] sim = np.empty((N + 1, N))
    cdef double[::1] fsim = np.empty(N + 1)
    cdef double[::1] xbar = np.empty(N)
    cdef double[::1] xr = np.empty(N)
    cdef double[::1] xe = np.empty(N)
    cdef double[::1] xc = np.empty(N)
    cdef double[::1] rowbuf = np.empty(N)
    cdef double[::1] start = np.ascontiguousarray(z0, dtype=float)
    cdef Py_ssize_t i, j, c, fcalls = 0
    cdef double fxr, fxe, fxc, dmax, fmax
    cdef bint shrink
    cdef double rho = 1.0, chi = 2.0, psi = 0.5, sigma = 0.5

    with nogil:
        for c in range(N):
            sim[0, c] = start[c]
        for i in range(N):
            for c in range(N):
                sim[i + 1, c] = start[c]
            sim[i + 1, i] = start[i] + step
        for i in range(N + 1):
            fsim[i] = _objective(&F.P, &sim[i, 0])
            fcalls += 1
        _sort_simplex(sim, fsim, N, rowbuf)

        while fcalls < maxfev:
            dmax = 0.0
            fmax = 0.0
            for i in range(1, N + 1):
                for c in range(N):
                    if fabs(sim[i, c] - sim[0, c]) > dmax:
                        dmax = fabs(sim[i, c] - sim[0, c])
                if not (fabs(fsim[0] - fsim[i]) <= fmax):
                    fmax = fabs(fsim[0] - fsim[i])
            if dmax <= xatol and fmax <= fatol:
                break

            for c in range(N):
                xbar[c] = 0.0
                for i in range(N):
                    xbar[c] += sim[i, c]
                xbar[c] /= N
                xr[c] = (1 + rho) * xbar[c] - rho * sim[N, c]
            fxr = _objective(&F.P, &xr[0])
            fcalls += 1
            shrink = False

            if fxr < fsim[0]:
                for c in range(N):
                    xe[c] = (1 + rho * chi) * xbar[c] - rho * chi * sim[N, c]
                fxe = _objective(&F.P, &xe[0])
                fcalls += 1
                if fxe < fxr:
                    for c in range(N):
                        sim[N, c] = xe[c]
                    fsim[N] = fxe
                else:
                    for c in range(N):
                        sim[N, c] = xr[c]
                    fsim[N] = fxr
            elif fxr < fsim[N - 1]:
                for c in range(N):
                    sim[N, c] = xr[c]
                fsim[N] = fxr
            elif fxr < fsim[N]:
                for c in range(N):
                    xc[c] = (1 + psi * rho) * xbar[c] - psi * rho * sim[N, c]
                fxc = _objective(&F.P, &xc[0])
                fcalls += 1
                if fxc <= fxr:
                    for c in range(N):
                        sim[N, c] = xc[c]
                    fsim[N] = fxc
                else:
                    shrink = True
            else:
                for c in range(N):
                    xc[c] = (1 - psi) * xbar[c] + psi * sim[N, c]
                fxc = _objective(&F.P, &xc[0])
                fcalls += 1
                if fxc < fsim[N]:
                    for c in range(N):
                        sim[N, c] = xc[c]
                    fsim[N] = fxc
                else:
                    shrink = True

            if shrink:
                for j in range(1, N + 1):
                    for c in range(N):
                        sim[j, c] = sim[0, c] + sigma * (sim[j, c] - sim[0, c])
                    fsim[j] = _objective(&F.P, &sim[j, 0])
                    fcalls += 1
            _sort_simplex(sim, fsim, N, rowbuf)

    return np.asarray(sim[0]).copy(), fsim[0], fcalls


# --- binary-support pairs --------------------------------------------------

cdef double _binary_ratio(const double* la, const double* lb, Py_ssize_t ny,
                          double lp1, double lp0, double lq1, double lq0,
                          const double* Tq, double* Tp, int code, double alpha,
                          double* work) noexcept nogil:
    cdef double nu2[2]
    cdef double mu2[2]
    cdef double din, dout
    nu2[0] = lp1
    nu2[1] = lp0
    mu2[0] = lq1
    mu2[1] = lq0
    din = _div(nu2, mu2, 2, code, alpha, 0.0, work)
    if not (din > MIN_DIV and din < INFINITY):
        return NAN
    dout = _div(Tp, Tq, ny, code, alpha, 0.0, work)
    return dout / din


def binary_scan(la, lb, logits, int code, double alpha):
    """Best ratio over the grid of binary pairs ``nu = p d_x + (1-p) d_x'``.

    ``la``/``lb`` are the log-rows of the two inputs restricted to the union
    of their supports; ``logits`` holds the grid for both ``p`` and ``q``.
    Returns ``(best_ratio, i, j)`` with ``p = sigmoid(logits[i])`` and
    ``q = sigmoid(logits[j])``; ``(-inf, -1, -1)`` if every point is excluded.
    """
    cdef double[::1] a = np.ascontiguousarray(la, dtype=float)
    cdef double[::1] b = np.ascontiguousarray(lb, dtype=float)
    cdef double[::1] g = np.ascontiguousarray(logits, dtype=float)
    cdef Py_ssize_t G = g.shape[0], ny = a.shape[0], i, j, y
    cdef double[:, ::1] T = np.empty((G, ny))
    cdef double[::1] s1 = np.empty(G)
    cdef double[::1] s0 = np.empty(G)
    cdef double[::1] work = np.empty(max(ny, 2))
    cdef double best = -INFINITY, r
    cdef Py_ssize_t bi = -1, bj = -1
    with nogil:
        for i in range(G):
            s1[i] = _log_sigmoid(g[i])
            s0[i] = _log_sigmoid(-g[i])
            for y in range(ny):
                T[i, y] = _logaddexp(s1[i] + a[y], s0[i] + b[y])
        for i in range(G):
            for j in range(G):
                if i == j:
                    continue
                r = _binary_ratio(&a[0], &b[0], ny, s1[i], s0[i], s1[j], s0[j],
                                  &T[j, 0], &T[i, 0], code, alpha, &work[0])
                if r > best:
                    best = r
                    bi = i
                    bj = j
    return best, bi, bj


def binary_ratio(la, lb, double lp_logit, double lq_logit, int code, double alpha):
    """Contraction ratio of a single binary pair given by its two logits."""
    cdef double[::1] a = np.ascontiguousarray(la, dtype=float)
    cdef double[::1] b = np.ascontiguousarray(lb, dtype=float)
    cdef Py_ssize_t ny = a.shape[0], y
    cdef double[::1] Tp = np.empty(ny)
    cdef double[::1] Tq = np.empty(ny)
    cdef double[::1] work = np.empty(max(ny, 2))
    cdef double p1 = _log_sigmoid(lp_logit), p0 = _log_sigmoid(-lp_logit)
    cdef double q1 = _log_sigmoid(lq_logit), q0 = _log_sigmoid(-lq_logit)
    for y in range(ny):
        Tp[y] = _logaddexp(p1 + a[y], p0 + b[y])
        Tq[y] = _logaddexp(q1 + a[y], q0 + b[y])
    return _binary_ratio(&a[0], &b[0], ny, p1, p0, q1, q0, &Tq[0], &Tp[0], code, alpha, &work[0])


# --- subset enumeration for the worst-case order ---------------------------

def subset_scan(mu_s, K_s):
    """Maximize the order-infinity ratio over restrictions of ``mu``.

    ``mu_s`` is ``mu`` on its support (positive entries); ``K_s`` the matching
    rows. For each nonempty proper subset ``A`` the ratio is
    ``1 - min_y log1p(S_c(y)/S_A(y)) / log1p(c/a)`` with ``S_A = sum_{x in A}
    mu(x) K(.|x)``, ``a = mu(A)`` and ``S_c``, ``c`` the complementary sums,
    which stays accurate when ``A`` carries almost all or almost none of the
    mass. Returns ``(best_ratio, best_mask)``.
    """
    cdef double[::1] mu = np.ascontiguousarray(mu_s, dtype=float)
    cdef double[:, ::1] K = np.ascontiguousarray(K_s, dtype=float)
    cdef Py_ssize_t m = mu.shape[0], ny = K.shape[1], i, y
    if m < 2 or m > 62:
        raise ValueError("support size must lie in [2, 62]")
    cdef double[::1] SA = np.empty(ny)
    cdef double[::1] SC = np.empty(ny)
    cdef long long mask, last = (1LL << m) - 1, best_mask = -1
    cdef double a, c, w, worst, v, r, best = -INFINITY
    with nogil:
        for mask in range(1, last):
            a = 0.0
            c = 0.0
            for y in range(ny):
                SA[y] = 0.0
                SC[y] = 0.0
            for i in range(m):
                w = mu[i]
                if (mask >> i) & 1:
                    a += w
                    for y in range(ny):
                        SA[y] += w * K[i, y]
                else:
                    c += w
                    for y in range(ny):
                        SC[y] += w * K[i, y]
            worst = INFINITY
            for y in range(ny):
                if SA[y] > 0:
                    v = log1p(SC[y] / SA[y])
                    if v < worst:
                        worst = v
            r = 1.0 - worst / log1p(c / a)
            if r > best:
                best = r
                best_mask = mask
    return best, best_mask
