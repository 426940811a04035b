"""Orthogonal polynomials for the pole-perturbed Laguerre and Gaussian weights.

Every weight handled here reduces, after at most a substitution v = x^2,
to the three-parameter family

    v^p exp(-a v - c v^(-k)),   v > 0,

whose moments obey the exact three-term relation (integration by parts)

    (m + p + 1) mu_m - a mu_{m+1} + c k mu_{m-k} = 0.

Only mu_{-k}, ..., mu_0 are integrated numerically; all higher moments come
from the relation run forward, where every term is positive.  The same
seeds give t-derivatives for free since d mu_m / dc = -mu_{m-k} and
d mu_m / da = -mu_{m+1}.

Recurrence coefficients follow from the moments with Chebyshev's
algorithm, optionally carried in forward-mode so that d/dt log Z is exact.
"""

from dataclasses import dataclass, field, replace

import mpmath as mp

from .specfun import PrecisionError

ENSEMBLES = ("pLUE", "pGUE")


def default_prec(m):
    """Working digits for a degree-m system (Hankel digit loss grows with m)."""
    return max(60, 12 + 6 * int(m))


@dataclass(frozen=True)
class PerturbedWeight:
    """x^alpha exp(-n (x + (t/x)^k)) on (0, inf), or its Gaussian analogue.

    ``ensemble='pGUE'`` is |x|^(2 alpha) exp(-(n/2)(x^2 + (t/x^2)^k)) on the
    real line.  ``rescaled=True`` (pLUE only) selects the weight
    x^alpha exp(-n (t x + x^(-k))) obtained from x -> t x.
    """

    ensemble: str = "pLUE"
    n: object = 1
    k: int = 1
    alpha: object = 0
    t: object = 0
    prec: int = None
    rescaled: bool = False

    def __post_init__(self):
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"ensemble must be one of {ENSEMBLES}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if not self.n > 0:
            raise ValueError("n must be positive")
        if self.t < 0:
            raise ValueError("t must be non-negative")
        lower = -1 if self.ensemble == "pLUE" else -0.5
        if not self.alpha > lower:
            raise ValueError(f"alpha must exceed {lower} for {self.ensemble}")
        if self.rescaled and (self.ensemble != "pLUE" or self.t == 0):
            raise ValueError("the rescaled weight needs pLUE and t > 0")

    def with_t(self, t):
        return replace(self, t=t)

    def family(self):
        """(p, a, c) of the reduced weight v^p exp(-a v - c v^-k)."""
        n, t, k, al = mp.mpf(self.n), mp.mpf(self.t), self.k, mp.mpf(self.alpha)
        if self.ensemble == "pGUE":
            return al - mp.mpf(1) / 2, n / 2, n / 2 * t ** k
        if self.rescaled:
            return al, n * t, n
        return al, n, n * t ** k

    def family_dt(self):
        """(da/dt, dc/dt) of the reduced parameters."""
        n, t, k = mp.mpf(self.n), mp.mpf(self.t), self.k
        if self.ensemble == "pGUE":
            return mp.mpf(0), n / 2 * k * t ** (k - 1)
        if self.rescaled:
            return n, mp.mpf(0)
        return mp.mpf(0), n * k * t ** (k - 1)

    def log_w(self, x):
        x = mp.mpf(x)
        n, t, k, al = mp.mpf(self.n), mp.mpf(self.t), self.k, mp.mpf(self.alpha)
        if self.ensemble == "pGUE":
            if x == 0:
                return mp.ninf
            x2 = x * x
            return al * mp.log(x2) - n / 2 * (x2 + (t / x2) ** k)
        if x <= 0:
            return mp.ninf
        if self.rescaled:
            return al * mp.log(x) - n * (t * x + x ** (-k))
        return al * mp.log(x) - n * (x + (t / x) ** k)

    def w(self, x):
        return mp.exp(self.log_w(x))

    @property
    def domain(self):
        return (mp.mpf(0), mp.inf) if self.ensemble == "pLUE" else (mp.ninf, mp.inf)


# ---------------------------------------------------------------------------
# moments

def _log_window(p, a, c, k):
    """Peak u0, log-peak f0, width scale and truncation window of exp(phi(u))."""
    q = p + 1
    phi = lambda u: q * u - a * mp.exp(u) - c * mp.exp(-k * u)
    dphi = lambda u: q - a * mp.exp(u) + k * c * mp.exp(-k * u)
    # dphi is strictly decreasing, so doubling brackets the unique peak
    lo, hi = mp.mpf(-1), mp.mpf(1)
    while dphi(lo) < 0:
        lo *= 2
    while dphi(hi) > 0:
        hi *= 2
    u0 = mp.findroot(dphi, (lo, hi), solver="anderson")
    f0 = phi(u0)
    width = 1 / mp.sqrt(a * mp.exp(u0) + k * k * c * mp.exp(-k * u0))
    thr = (mp.mp.dps + 15) * mp.log(10)
    left = right = width
    while phi(u0 - left) - f0 > -thr:
        left *= 2
    while phi(u0 + right) - f0 > -thr:
        right *= 2
    return phi, u0, f0, width, left, right


def family_seed_moments(p, a, c, k, shifts):
    """int_0^inf v^(p+j) exp(-a v - c v^-k) dv for each j in ``shifts``.

    With v = e^u the integrand is analytic and doubly-exponentially small at
    both ends, so the trapezoid rule converges geometrically.  The step is
    halved (reusing old nodes) until two sweeps agree.
    """
    if c == 0:
        if any(p + j <= -1 for j in shifts):
            raise ValueError("moment diverges at the origin")
        return [mp.gamma(p + j + 1) / a ** (p + j + 1) for j in shifts]
    if a <= 0:
        raise ValueError("moment diverges at infinity")
    phi, u0, f0, width, left, right = _log_window(p, a, c, k)

    def sweep(step, offset):
        acc = [mp.mpf(0)] * len(shifts)
        m0 = int(mp.floor((-left - offset) / step))
        m1 = int(mp.ceil((right - offset) / step))
        for m in range(m0, m1 + 1):
            u = u0 + offset + m * step
            e, eu = mp.exp(phi(u) - f0), mp.exp(u)
            for i, j in enumerate(shifts):
                acc[i] += e * eu ** j
        return acc

    h = width / 2
    total = sweep(h, 0)
    est = [x * h for x in total]
    tol = mp.mpf(10) ** (-(mp.mp.dps - 4))
    for _ in range(30):
        total = [x + y for x, y in zip(total, sweep(h, h / 2))]
        h /= 2
        new = [x * h for x in total]
        if all(abs(x - y) <= tol * abs(x) for x, y in zip(new, est)):
            return [x * mp.exp(f0) for x in new]
        est = new
    raise PrecisionError("trapezoid sums failed to converge")


def family_moment_quad(q, a, c, k):
    """int_0^inf v^q exp(-a v - c v^-k) dv by tanh-sinh in u = log v.

    Independent of :func:`family_seed_moments`; used as a cross-check and
    for isolated moments.
    """
    if c == 0:
        if q <= -1:
            raise ValueError("moment diverges at the origin")
        return mp.gamma(q + 1) / a ** (q + 1)
    if a <= 0:
        raise ValueError("moment diverges at infinity")
    phi, u0, f0, _, left, right = _log_window(q, a, c, k)
    f = lambda u: mp.exp(phi(u) - f0)
    return mp.quad(f, mp.linspace(u0 - left, u0 + right, 9)) * mp.exp(f0)


def _reduced_moments(p, a, c, k, count, seeds=None):
    """mu_{-k}, ..., mu_{count-1} of the reduced family (list offset by k)."""
    if seeds is None:
        with mp.workdps(mp.mp.dps + 10):
            seeds = family_seed_moments(p, a, c, k, range(-k, 1))
    mu = list(seeds)
    for m in range(count - 1):
        mu.append(((m + p + 1) * mu[m + k] + c * k * mu[m]) / a)
    return mu


def moment(w, m):
    """mu_m = int x^m w(x) dx by direct quadrature (no recurrence)."""
    with mp.workdps(_prec(w) + 10):
        p, a, c = w.family()
        if w.ensemble == "pGUE":
            if m % 2:
                return mp.mpf(0)
            val = family_moment_quad(p + m // 2, a, c, w.k)
        else:
            val = family_moment_quad(p + m, a, c, w.k)
    return +val


def moments(w, count, derivative=False):
    """mu_0, ..., mu_{count-1} (and their t-derivatives if requested).

    Works at the caller's working precision.
    """
    p, a, c = w.family()
    k = w.k
    if c == 0:
        if derivative:
            raise ValueError("t-derivatives need t > 0")
        red = [mp.gamma(p + j + 1) / a ** (p + j + 1) for j in range(count)]
        red = [None] * k + red
    else:
        red = _reduced_moments(p, a, c, k, count + 1)
    da, dc = w.family_dt()
    dred = None
    if derivative:
        # d mu_j = -da mu_{j+1} - dc mu_{j-k}
        dred = [-da * red[j + k + 1] - dc * red[j] for j in range(count)]
    vals = red[k:k + count]
    if w.ensemble == "pGUE":
        full = [mp.mpf(0)] * count
        dfull = [mp.mpf(0)] * count if derivative else None
        for i in range(0, count, 2):
            full[i] = vals[i // 2]
            if derivative:
                dfull[i] = dred[i // 2]
        return (full, dfull) if derivative else full
    return (vals, dred) if derivative else vals


# ---------------------------------------------------------------------------
# Chebyshev algorithm

def chebyshev_algorithm(mu, N, dmu=None):
    """Recurrence data from 2N moments.

    Returns ``(a, b, h)`` lists of length N, where h_j = int p_j^2 w and
    b_0 = mu_0 by convention.  When ``dmu`` is supplied the derivatives
    ``(da, db, dh)`` are appended to the result.
    """
    L = 2 * N
    if len(mu) < L:
        raise ValueError(f"need {L} moments, got {len(mu)}")
    zero = mp.mpf(0)
    sig_prev = [zero] * L
    sig = list(mu[:L])
    a = [mu[1] / mu[0]]
    b = [mu[0]]
    h = [mu[0]]
    deriv = dmu is not None
    if deriv:
        dsig_prev = [zero] * L
        dsig = list(dmu[:L])
        da = [(dmu[1] - a[0] * dmu[0]) / mu[0]]
        db = [dmu[0]]
        dh = [dmu[0]]
    for kk in range(1, N):
        ak, bk = a[kk - 1], b[kk - 1]
        new = [None] * L
        for l in range(kk, L - kk):
            new[l] = sig[l + 1] - ak * sig[l] - bk * sig_prev[l]
        if deriv:
            dak, dbk = da[kk - 1], db[kk - 1]
            dnew = [None] * L
            for l in range(kk, L - kk):
                dnew[l] = (dsig[l + 1] - ak * dsig[l] - dak * sig[l]
                           - bk * dsig_prev[l] - dbk * sig_prev[l])
        s_kk, s_prev = new[kk], sig[kk - 1]
        r1 = new[kk + 1] / s_kk
        r0 = sig[kk] / s_prev
        a.append(r1 - r0)
        b.append(s_kk / s_prev)
        h.append(s_kk)
        if deriv:
            dr1 = (dnew[kk + 1] - r1 * dnew[kk]) / s_kk
            dr0 = (dsig[kk] - r0 * dsig[kk - 1]) / s_prev
            da.append(dr1 - dr0)
            db.append((dnew[kk] - b[-1] * dsig[kk - 1]) / s_prev)
            dh.append(dnew[kk])
            dsig_prev, dsig = dsig, dnew
        sig_prev, sig = sig, new
    if deriv:
        return a, b, h, da, db, dh
    return a, b, h


# ---------------------------------------------------------------------------
# OP systems

@dataclass(frozen=True, eq=False)
class OPSystem:
    weight: PerturbedWeight
    degree: int
    prec: int
    moments: list
    norms: list
    a: list
    b: list
    hankel: list
    dnorms: list = field(default=None)
    da: list = field(default=None)

    def log_partition(self, n):
        if n > self.degree + 1:
            raise ValueError("system degree too small")
        with mp.workdps(self.prec):
            return mp.fsum(mp.log(h) for h in self.norms[:n])

    def dlog_partition(self, n):
        """Exact d/dt log Z_n from the forward-mode norms."""
        if self.dnorms is None:
            raise ValueError("system built without derivatives")
        with mp.workdps(self.prec):
            return mp.fsum(d / h for d, h in zip(self.dnorms[:n], self.norms[:n]))


def _prec(w, m=0):
    return int(w.prec) if w.prec else default_prec(m)


def _build_at(w, m, dps, derivative):
    with mp.workdps(dps):
        N = m + 1
        if derivative:
            mu, dmu = moments(w, 2 * N, derivative=True)
            a, b, h, da, db, dh = chebyshev_algorithm(mu, N, dmu)
        else:
            mu = moments(w, 2 * N)
            a, b, h = chebyshev_algorithm(mu, N)
            da = dh = None
    return mu, a, b, h, da, dh


def build_op_system(w, m, derivative=False, verify=True, guard=20):
    """Monic OPs p_0..p_m (plus p_{m+1} data through a_m, b_m).

    ``verify`` repeats the construction with ``guard`` extra digits and
    raises :class:`PrecisionError` if any log h_j moves by more than
    10^(-prec/2).
    """
    prec = _prec(w, m)
    mu, a, b, h, da, dh = _build_at(w, m, prec, derivative)
    with mp.workdps(prec):
        if any(not x > 0 for x in h):
            raise PrecisionError("non-positive norm: precision exhausted")
        if verify:
            _, _, _, h2, _, _ = _build_at(w, m, prec + guard, False)
            tol = mp.mpf(10) ** (-(prec // 2))
            for j, (x, y) in enumerate(zip(h, h2)):
                if abs(mp.log(x) - mp.log(y)) > tol:
                    raise PrecisionError(
                        f"log h_{j} unstable at {prec} digits; raise prec")
        D = [mp.mpf(1)]
        for x in h:
            D.append(D[-1] * x)
    return OPSystem(w, m, prec, mu, h, a, b, D, dh, da)


def op_eval(sys, j, x, derivative=False):
    """Monic p_j(x) by the three-term recurrence (optionally with p_j')."""
    if j > sys.degree + 1:
        raise ValueError("degree too high for this system")
    with mp.workdps(sys.prec):
        x = mp.mpf(x)
        p0, p1 = mp.mpf(0), mp.mpf(1)
        d0, d1 = mp.mpf(0), mp.mpf(0)
        for i in range(j):
            p2 = (x - sys.a[i]) * p1 - (sys.b[i] * p0 if i else 0)
            if derivative:
                d2 = p1 + (x - sys.a[i]) * d1 - (sys.b[i] * d0 if i else 0)
                d0, d1 = d1, d2
            p0, p1 = p1, p2
    return (p1, d1) if derivative else p1


def cd_kernel(sys, n, x, y):
    """Christoffel-Darboux kernel K_n(x, y) with the sqrt(w(x) w(y)) factor."""
    if n > sys.degree + 1:
        raise ValueError("system degree too small for this kernel")
    w = sys.weight
    with mp.workdps(sys.prec):
        x, y = mp.mpf(x), mp.mpf(y)
        hn1 = sys.norms[n - 1]
        if x == y:
            pn, dpn = op_eval(sys, n, x, True)
            pm, dpm = op_eval(sys, n - 1, x, True)
            return w.w(x) * (dpn * pm - dpm * pn) / hn1
        pnx, pny = op_eval(sys, n, x), op_eval(sys, n, y)
        pmx, pmy = op_eval(sys, n - 1, x), op_eval(sys, n - 1, y)
        sw = mp.exp((w.log_w(x) + w.log_w(y)) / 2)
        return sw * (pnx * pmy - pny * pmx) / (hn1 * (x - y))


def one_point(sys, n, x):
    return cd_kernel(sys, n, x, x)


def partition(w, n, **kw):
    """log Z_n = sum_{j<n} log h_j (no 1/n! factor)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return build_op_system(w, n - 1, **kw).log_partition(n)


def dlog_partition_dt(w, n, **kw):
    """(log Z_n, d/dt log Z_n) with the derivative carried exactly."""
    sys = build_op_system(w, n - 1, derivative=True, **kw)
    return sys.log_partition(n), sys.dlog_partition(n)


# ---------------------------------------------------------------------------
# exact finite-n identities

def pgue_plue_residual(n, k, alpha, t, prec=60):
    """Residuals of the even and odd pGUE <-> pLUE partition identities."""
    alpha, t = mp.mpf(alpha), mp.mpf(t)
    with mp.workdps(prec):
        half = mp.mpf(1) / 2
        lue = lambda nn, al, tt: partition(
            PerturbedWeight("pLUE", nn, k, al, tt, prec), nn)
        gue = lambda N: partition(PerturbedWeight("pGUE", N, k, alpha, t, prec), N)
        even = gue(2 * n) - lue(n, alpha - half, t) - lue(n, alpha + half, t)
        e = mp.mpf(k + 1) / k
        pref = (n + alpha + half) * (n * mp.log(mp.mpf(2 * n) / (2 * n + 1))
                                     + (n + 1) * mp.log(mp.mpf(2 * n + 2) / (2 * n + 1)))
        odd = (gue(2 * n + 1) - pref
               - lue(n + 1, alpha - half, (mp.mpf(2 * n + 1) / (2 * n + 2)) ** e * t)
               - lue(n, alpha + half, (mp.mpf(2 * n + 1) / (2 * n)) ** e * t))
    return even, odd


def op_coefficients(sys, j):
    """Monomial coefficients [c_0, ..., c_j] of p_j."""
    with mp.workdps(sys.prec):
        prev, cur = [], [mp.mpf(1)]
        for i in range(j):
            nxt = [mp.mpf(0)] + cur
            for l, cl in enumerate(cur):
                nxt[l] -= sys.a[i] * cl
            if i:
                for l, cl in enumerate(prev):
                    nxt[l] -= sys.b[i] * cl
            prev, cur = cur, nxt
    return cur


def _laurent_mul(A, B):
    out = {}
    for pa, ca in A.items():
        for pb, cb in B.items():
            out[pa + pb] = out.get(pa + pb, 0) + ca * cb
    return out


def _laurent_d(A):
    return {p - 1: p * c for p, c in A.items() if p != 0}


def _laurent_add(*terms):
    out = {}
    for sign, T in terms:
        for p, c in T.items():
            out[p] = out.get(p, 0) + sign * c
    return out


def y_residue(w, n, terms=None):
    """Minus the z^-2 coefficient of Tr(Y^-1 Y' sigma3) at infinity.

    Y is the 2x2 orthogonal-polynomial matrix of degree n.  The Cauchy
    transforms enter through their expansion coefficients
    int p_j x^i w dx, evaluated from moments.
    """
    terms = terms or 2 * n + 4
    prec = _prec(w, n)
    with mp.workdps(prec):
        sys = build_op_system(w, n, verify=False)
        mu = moments(w, n + terms + 1)
        two_pi_i = 2j * mp.pi

        def poly(j):
            return {p: c for p, c in enumerate(op_coefficients(sys, j))}

        def cauchy(j):
            coef = op_coefficients(sys, j)
            out = {}
            for i in range(terms):
                ci = mp.fsum(cl * mu[l + i] for l, cl in enumerate(coef))
                out[-i - 1] = -ci / two_pi_i
            return out

        hn1 = sys.norms[n - 1]
        Y11, Y12 = poly(n), cauchy(n)
        scale = -two_pi_i / hn1
        Y21 = {p: scale * c for p, c in poly(n - 1).items()}
        Y22 = {p: scale * c for p, c in cauchy(n - 1).items()}
        T = _laurent_add(
            (1, _laurent_mul(Y22, _laurent_d(Y11))),
            (-1, _laurent_mul(Y12, _laurent_d(Y21))),
            (1, _laurent_mul(Y21, _laurent_d(Y12))),
            (-1, _laurent_mul(Y11, _laurent_d(Y22))),
        )
        return -T.get(-2, 0)


def _central_dlogz(w, n, step):
    f = lambda tt: partition(w.with_t(tt), n, verify=False)
    return (f(w.t + step) - f(w.t - step)) / (2 * step)


def central_dlogz(w, n, rel_step=None):
    """d/dt log Z_n by central differences with a Richardson consistency check."""
    prec = _prec(w, n)
    with mp.workdps(prec):
        t = mp.mpf(w.t)
        h = t * mp.mpf(10) ** (-(rel_step or prec // 4))
        d1 = _central_dlogz(w, n, h)
        d2 = _central_dlogz(w, n, h / 2)
        rich = (4 * d2 - d1) / 3
        if abs(d1 - d2) > mp.mpf(10) ** (-(prec // 3)) * max(1, abs(rich)):
            raise PrecisionError("finite-difference step too large for this precision")
    return rich


def diff_identity_residual(w, n, t=None, prec=None):
    """Residuals of the t-derivative identity in kernel and residue form.

    kernel form:  | d/dt log Ztilde + n int x Ktilde_n(x, x) dx |, with the
                  integral equal to sum_{j<n} atilde_j;
    residue form: | d/dt log Z - (n^2 + alpha n)/t - (n/2t) Res |.
    """
    if w.ensemble != "pLUE":
        raise ValueError("the identity is stated for pLUE")
    t = w.t if t is None else t
    prec = prec or _prec(w, n)
    w = replace(w, t=mp.mpf(t), prec=prec, rescaled=False)
    with mp.workdps(prec):
        wt = replace(w, rescaled=True)
        lhs_tilde = central_dlogz(wt, n)
        sys_t = build_op_system(wt, n - 1, verify=False)
        kernel_int = mp.fsum(sys_t.a[:n])
        kernel_form = abs(lhs_tilde + w.n * kernel_int)

        lhs = central_dlogz(w, n)
        res = y_residue(w, n)
        n_, al = mp.mpf(w.n), mp.mpf(w.alpha)
        rhs = (n_ ** 2 + al * n_) / w.t + n_ / (2 * w.t) * res
        residue_form = abs(lhs - rhs)
    return kernel_form, residue_form
