"""Arbitrary-precision special functions and explicit model matrices.

Bessel and Airy evaluations are delegated to mpmath and wrapped in a
two-precision agreement check, so a result is either accurate to
``prec - 10`` digits or a :class:`PrecisionError` is raised.

Branch conventions: ``z**(1/2)``, ``z**(1/4)``, ``z**alpha`` and ``log z``
are principal (cut on the negative axis).
"""

import mpmath as mp

DEFAULT_PREC = 40

SIGMA3 = ((1, 0), (0, -1))


class PrecisionError(ArithmeticError):
    """Raised when a result cannot be certified at the requested precision."""


class DomainError(ValueError):
    """Raised for evaluations on a branch cut or jump contour."""


def _check_prec(prec):
    prec = int(prec)
    if prec < 30:
        raise ValueError(f"precision must be at least 30 digits, got {prec}")
    return prec


def _certified(fn, prec, guard=12):
    """Evaluate ``fn()`` at two precisions and insist they agree.

    ``fn`` must return an mpf/mpc or a tuple of them.  The agreement
    target is ``prec - 10`` digits, relative to the magnitude of each
    component.
    """
    prec = _check_prec(prec)
    with mp.workdps(prec + guard):
        lo = fn()
    with mp.workdps(prec + 2 * guard):
        hi = fn()
    single = not isinstance(hi, tuple)
    if single:
        lo, hi = (lo,), (hi,)
    with mp.workdps(prec + 2 * guard):
        for a, b in zip(lo, hi):
            if not (mp.isfinite(a) and mp.isfinite(b)):
                raise PrecisionError(f"non-finite value at {prec} digits")
            scale = max(abs(b), mp.mpf(10) ** (-(prec + guard)))
            if abs(a - b) > scale * mp.mpf(10) ** (-(prec - 10)):
                raise PrecisionError(
                    f"evaluation did not converge to {prec - 10} digits")
    return hi[0] if single else hi


def bessel(kind, nu, x, prec=DEFAULT_PREC):
    """Bessel function J, I or K of real order ``nu`` at ``x > 0``."""
    kind = kind.upper()
    fns = {"J": mp.besselj, "I": mp.besseli, "K": mp.besselk}
    if kind not in fns:
        raise ValueError(f"unknown Bessel kind {kind!r}")
    if x == 0 and kind == "J" and nu >= 0:
        pass
    elif not x > 0:
        raise DomainError("Bessel argument must be positive")
    f = fns[kind]
    return _certified(lambda: f(mp.mpf(nu), mp.mpf(x)), prec)


def bessel_deriv(kind, nu, x, prec=DEFAULT_PREC):
    """First derivative in ``x`` of :func:`bessel`."""
    kind = kind.upper()
    nu, x = mp.mpf(nu), mp.mpf(x)
    rules = {
        "J": lambda: (mp.besselj(nu - 1, x) - mp.besselj(nu + 1, x)) / 2,
        "I": lambda: (mp.besseli(nu - 1, x) + mp.besseli(nu + 1, x)) / 2,
        "K": lambda: -(mp.besselk(nu - 1, x) + mp.besselk(nu + 1, x)) / 2,
    }
    if kind not in rules:
        raise ValueError(f"unknown Bessel kind {kind!r}")
    if not x > 0:
        raise DomainError("Bessel argument must be positive")
    return _certified(rules[kind], prec)


def airy(x, prec=DEFAULT_PREC):
    """Return ``(Ai(x), Ai'(x))`` for real ``x``."""
    return _certified(lambda: (mp.airyai(mp.mpf(x)), mp.airyai(mp.mpf(x), 1)), prec)


def _bessel_kernel_raw(alpha, u, v):
    su, sv = mp.sqrt(u), mp.sqrt(v)
    if u == v:
        # confluent limit of the Christoffel-Darboux form
        return (mp.besselj(alpha, su) ** 2
                - mp.besselj(alpha + 1, su) * mp.besselj(alpha - 1, su)) / 4
    ju, jv = mp.besselj(alpha, su), mp.besselj(alpha, sv)
    dju, djv = mp.besselj(alpha, su, 1), mp.besselj(alpha, sv, 1)
    return (ju * sv * djv - jv * su * dju) / (2 * (u - v))


def bessel_kernel(alpha, u, v, prec=DEFAULT_PREC):
    """Hard-edge Bessel kernel J_alpha(u, v) for u, v > 0."""
    if not (u > 0 and v > 0):
        raise DomainError("Bessel kernel needs positive arguments")
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    return _certified(
        lambda: _bessel_kernel_raw(mp.mpf(alpha), mp.mpf(u), mp.mpf(v)), prec)


def _airy_kernel_raw(u, v):
    if u == v:
        return mp.airyai(u, 1) ** 2 - u * mp.airyai(u) ** 2
    return (mp.airyai(u) * mp.airyai(v, 1) - mp.airyai(v) * mp.airyai(u, 1)) / (u - v)


def airy_kernel(u, v, prec=DEFAULT_PREC):
    """Soft-edge Airy kernel A(u, v)."""
    return _certified(lambda: _airy_kernel_raw(mp.mpf(u), mp.mpf(v)), prec)


# ---------------------------------------------------------------------------
# 2x2 matrix helpers (plain mpmath matrices)

def mat2(a, b, c, d):
    return mp.matrix([[a, b], [c, d]])


def det2(m):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def norm2(m):
    """Max-entry norm, enough for residual bookkeeping."""
    return max(abs(m[i, j]) for i in range(2) for j in range(2))


def _N():
    s = 1 / mp.sqrt(2)
    return mat2(s, 1j * s, 1j * s, s)


def _diag_pow(z, p):
    """z ** (p * sigma3) with principal powers."""
    w = mp.power(z, p)
    return mat2(w, 0, 0, 1 / w)


# ---------------------------------------------------------------------------
# Bessel model matrix

def bessel_region(z):
    """Sector label 1, 2 or 3 for the Bessel model contour.

    Omega_1 is |arg z| < 2pi/3, Omega_2 is 2pi/3 < arg z < pi and
    Omega_3 is -pi < arg z < -2pi/3.
    """
    z = mp.mpc(z)
    if z == 0:
        raise DomainError("z = 0 is the contour vertex")
    th = mp.arg(z)
    edge = 2 * mp.pi / 3
    tol = mp.mpf(10) ** (-(mp.mp.dps - 5))
    if abs(abs(th) - edge) < tol or abs(abs(th) - mp.pi) < tol:
        raise DomainError(f"z = {z} lies on the Bessel model contour")
    if abs(th) < edge:
        return 1
    return 2 if th > 0 else 3


def bessel_H(region, alpha):
    if region == 1:
        return mat2(1, 0, 0, 1)
    if region == 2:
        return mat2(1, 0, -mp.expjpi(alpha), 1)
    if region == 3:
        return mat2(1, 0, mp.expjpi(-alpha), 1)
    raise ValueError(f"unknown region {region}")


def _bessel_model_raw(z, region, alpha):
    rz = mp.sqrt(z)
    I, K = mp.besseli(alpha, rz), mp.besselk(alpha, rz)
    dI = (mp.besseli(alpha - 1, rz) + mp.besseli(alpha + 1, rz)) / 2
    dK = -(mp.besselk(alpha - 1, rz) + mp.besselk(alpha + 1, rz)) / 2
    core = mat2(I, 1j / mp.pi * K, mp.pi * 1j * rz * dI, -rz * dK)
    pre = mat2(1, 0, 1j / 8 * (4 * alpha ** 2 + 3), 1)
    scale = mat2(mp.sqrt(mp.pi), 0, 0, 1 / mp.sqrt(mp.pi))
    return pre * scale * core * bessel_H(region, alpha)


def bessel_model_matrix(z, region=None, alpha=0, prec=DEFAULT_PREC):
    """Bessel model solution Upsilon(z) in sector ``region`` (1, 2 or 3).

    When ``region`` is given it must agree with ``arg z``; omitting it
    selects the sector containing ``z``.
    """
    prec = _check_prec(prec)
    with mp.workdps(prec + 10):
        z = mp.mpc(z)
        actual = bessel_region(z)
    if region is not None and int(region) != actual:
        raise DomainError(f"z = {z} lies in region {actual}, not {region}")
    alpha = mp.mpf(alpha)

    def run():
        m = _bessel_model_raw(mp.mpc(z), actual, alpha)
        return tuple(m[i, j] for i in range(2) for j in range(2))

    e = _certified(run, prec)
    return mat2(*e)


def bessel_model_limit(x, alpha=0, side=+1, eps=1e-8, prec=DEFAULT_PREC):
    """Upsilon at ``x + side*i*eps`` using the sector on that side."""
    with mp.workdps(prec + 10):
        z = mp.mpc(x, side * mp.mpf(eps))
    return bessel_model_matrix(z, None, alpha, prec)


# ---------------------------------------------------------------------------
# Airy model matrix

def airy_region(z):
    """Sector 1..4: (0, 2pi/3), (2pi/3, pi), (-pi, -2pi/3), (-2pi/3, 0)."""
    z = mp.mpc(z)
    if z == 0:
        raise DomainError("z = 0 is the contour vertex")
    th = mp.arg(z)
    edge = 2 * mp.pi / 3
    tol = mp.mpf(10) ** (-(mp.mp.dps - 5))
    for ray in (0, edge, -edge, mp.pi, -mp.pi):
        if abs(th - ray) < tol:
            raise DomainError(f"z = {z} lies on the Airy model contour")
    if 0 < th < edge:
        return 1
    if th > edge:
        return 2
    if th < -edge:
        return 3
    return 4


def _airy_model_raw(z, region):
    w = mp.expjpi(mp.mpf(2) / 3)
    w2 = w * w
    if region in (1, 2):
        core = mat2(mp.airyai(z), mp.airyai(w2 * z),
                    mp.airyai(z, 1), w2 * mp.airyai(w2 * z, 1))
    else:
        core = mat2(mp.airyai(z), -w2 * mp.airyai(w * z),
                    mp.airyai(z, 1), -mp.airyai(w * z, 1))
    rot = mat2(mp.expjpi(-mp.mpf(1) / 6), 0, 0, mp.expjpi(mp.mpf(1) / 6))
    m = core * rot
    if region == 2:
        m = m * mat2(1, 0, -1, 1)
    elif region == 3:
        m = m * mat2(1, 0, 1, 1)
    MA = mp.sqrt(2 * mp.pi) * mp.expjpi(mp.mpf(1) / 6) * mat2(1, 0, 0, -1j)
    return MA * m


def airy_model_matrix(z, prec=DEFAULT_PREC):
    """Airy model solution with the sector chosen from ``arg z``."""
    prec = _check_prec(prec)
    with mp.workdps(prec + 10):
        z = mp.mpc(z)
        region = airy_region(z)

    def run():
        m = _airy_model_raw(mp.mpc(z), region)
        return tuple(m[i, j] for i in range(2) for j in range(2))

    return mat2(*_certified(run, prec))


# ---------------------------------------------------------------------------
# Cauchy-type integral near the origin

def _f2_raw(z, s, k, alpha):
    # u = -tau maps the ray (0, -inf) onto (0, inf); du/(u - z) = dtau/(tau + z)
    def integrand(tau):
        return tau ** alpha * mp.exp(-tau - 2 * (s / tau) ** k) / (tau + z)

    pts = [mp.mpf(0)]
    peak = _f2_peak(s, k, alpha)
    for p in sorted({peak, abs(z)}):
        if p > 0:
            pts.append(p)
    pts.append(mp.inf)
    val = mp.quad(integrand, pts)
    return mp.exp(-z) / (2j * mp.pi) * val


def _f2_peak(s, k, alpha):
    # maximum of tau^alpha exp(-tau - 2 (s/tau)^k), found on a log scale
    if s == 0:
        return max(mp.mpf(alpha), mp.mpf(0))
    d = lambda v: alpha - mp.exp(v) + 2 * k * (s / mp.exp(v)) ** k
    return mp.exp(mp.findroot(d, mp.log(1 + s)))


def f2_origin(z, s, k, alpha, prec=DEFAULT_PREC):
    """Cauchy-type integral along the negative axis.

    The ray runs from 0 to -infinity.  With that orientation the boundary
    values at ``x < 0`` satisfy

        f2(x + i0) - f2(x - i0) = -|x|**alpha * exp(-2 (s/|x|)**k).
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    if s == 0 and alpha <= -1:
        raise ValueError("integrand is not integrable for s = 0, alpha <= -1")
    with mp.workdps(prec + 10):
        zz = mp.mpc(z)
        if zz.imag == 0 and zz.real <= 0:
            raise DomainError("f2 is cut along (-inf, 0]")
    return _certified(
        lambda: _f2_raw(mp.mpc(z), mp.mpf(s), int(k), mp.mpf(alpha)), prec)


def entire_h(z, alpha, prec=DEFAULT_PREC, sign=+1):
    """Combination of f2(z, 0) with z**alpha that is free of a jump.

    ``sign=+1`` returns ``f2(z, 0) + z**alpha / (2i sin(pi alpha))``; with
    the 0 -> -infinity orientation this is continuous across the negative
    axis.  ``sign=-1`` gives ``-f2(z, 0) + ...``, which jumps by 2|x|**alpha
    there; it is kept for comparison.
    """
    if mp.almosteq(mp.mpf(alpha), mp.nint(alpha)):
        raise ValueError("integer alpha uses the logarithmic variant")
    z = mp.mpc(z)
    with mp.workdps(prec + 10):
        f = f2_origin(z, 0, 1, alpha, prec)
        return sign * f + mp.power(z, alpha) / (2j * mp.sin(mp.pi * alpha))


# ---------------------------------------------------------------------------
# residual checks for the model problems

def _inv2(m):
    d = det2(m)
    return mat2(m[1, 1] / d, -m[0, 1] / d, -m[1, 0] / d, m[0, 0] / d)


def bessel_jumps(alpha):
    """(angle, plus_side, J): rays leave 0, '+' is the counter-clockwise side."""
    a = mp.mpf(alpha)
    return [
        (2 * mp.pi / 3, +1, mat2(1, 0, -mp.expjpi(a), 1)),
        (mp.pi, +1, mat2(0, -1, 1, 0)),
        (-2 * mp.pi / 3, +1, mat2(1, 0, -mp.expjpi(-a), 1)),
    ]


def airy_jumps():
    """(angle, plus_side, J) with plus_side = +1 for the counter-clockwise side.

    The three rays off the positive axis leave 0; the positive axis points
    towards 0, so its '+' side is below.
    """
    return [
        (2 * mp.pi / 3, +1, mat2(1, 0, -1, 1)),
        (mp.pi, +1, mat2(0, -1, 1, 0)),
        (-2 * mp.pi / 3, +1, mat2(1, 0, -1, 1)),
        (mp.mpf(0), -1, mat2(1, -1, 0, 1)),
    ]


def jump_residual(model, angle, r, plus_side, J, eps=1e-8, prec=DEFAULT_PREC):
    """|| Upsilon_-^{-1} Upsilon_+ - J || at r e^{i angle}, sides eps apart."""
    with mp.workdps(prec + 10):
        z = mp.mpf(r) * mp.expj(angle)
        normal = 1j * mp.expj(angle) * plus_side * mp.mpf(eps)
        plus, minus = model(z + normal), model(z - normal)
        return norm2(_inv2(minus) * plus - J)


def bessel_asymptotic_residual(z, alpha=0, prec=DEFAULT_PREC):
    """|| Upsilon e^{-sqrt(z) sigma3} N^{-1} z^{sigma3/4} - I ||, which is O(1/z)."""
    with mp.workdps(prec + 10):
        z = mp.mpc(z)
        U = bessel_model_matrix(z, None, alpha, prec)
        rz = mp.sqrt(z)
        E = mat2(mp.exp(-rz), 0, 0, mp.exp(rz))
        return norm2(U * E * _inv2(_N()) * _diag_pow(z, mp.mpf(1) / 4) - mp.eye(2))


def airy_asymptotic_residual(z, prec=DEFAULT_PREC):
    """|| N^{-1} z^{sigma3/4} Upsilon e^{(2/3) z^{3/2} sigma3} - I ||, which is O(z^{-3/2})."""
    with mp.workdps(prec + 10):
        z = mp.mpc(z)
        U = airy_model_matrix(z, prec)
        e = mp.exp(2 * mp.power(z, mp.mpf(3) / 2) / 3)
        E = mat2(e, 0, 0, 1 / e)
        return norm2(_inv2(_N()) * _diag_pow(z, mp.mpf(1) / 4) * U * E - mp.eye(2))


def decay_slope(residual, direction, r1, r2):
    """log-log slope of ``residual`` between radii r1 and r2 along ``direction``."""
    a = residual(mp.mpf(r1) * direction)
    b = residual(mp.mpf(r2) * direction)
    return float(mp.log(b / a) / mp.log(mp.mpf(r2) / r1))
