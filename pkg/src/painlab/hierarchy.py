"""The Painleve III hierarchy as sampled-function algebra.

Functions of ``s`` are carried as :class:`GridFunction` values.  Two
differentiation schemes are available:

* ``"fd"``: local Fornberg finite differences on arbitrary nodes.  The
  ``order`` is the formal accuracy of every derivative, which makes the
  observed convergence rate under refinement a checkable quantity.
* ``"cheb"``: global barycentric (spectral) differentiation, intended for
  Chebyshev-type node sets.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np


class GridMismatch(ValueError):
    pass


class HierarchySingularity(ArithmeticError):
    """A hierarchy member vanishes on the grid where it must be inverted."""

    def __init__(self, msg, location):
        super().__init__(f"{msg} near s = {location:.6g}")
        self.location = location


# ---------------------------------------------------------------------------
# grids

def fornberg_weights(x0, x, m):
    """Finite-difference weights for the m-th derivative at ``x0``.

    Classic Fornberg recursion; returns an array of length ``len(x)``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for kk in range(mn, 0, -1):
                    c[i, kk] = c1 * (kk * c[i - 1, kk - 1] - c5 * c[i - 1, kk]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for kk in range(mn, 0, -1):
                c[j, kk] = (c4 * c[j, kk] - kk * c[j, kk - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def chebyshev_nodes(a, b, n):
    """Chebyshev-Lobatto nodes on [a, b] in increasing order."""
    j = np.arange(n)
    return a + (b - a) * (1 - np.cos(np.pi * j / (n - 1))) / 2


@dataclass(frozen=True)
class Scheme:
    kind: str = "fd"
    order: int = 6

    def __post_init__(self):
        if self.kind not in ("fd", "cheb"):
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.kind == "fd" and self.order < 4:
            raise ValueError("finite-difference order must be at least 4")


_matrix_cache = {}


def _stencil(n, i, width):
    lo = min(max(i - width // 2, 0), n - width)
    return lo, lo + width


def diff_matrix(nodes, m, scheme):
    """Dense matrix mapping samples to samples of the m-th derivative."""
    nodes = np.asarray(nodes, dtype=float)
    key = (nodes.tobytes(), m, scheme)
    if key in _matrix_cache:
        return _matrix_cache[key]
    n = len(nodes)
    if scheme.kind == "fd":
        width = scheme.order + m
        if width > n:
            raise GridMismatch(f"grid of {n} points too small for a {width}-point stencil")
        D = np.zeros((n, n))
        for i in range(n):
            lo, hi = _stencil(n, i, width)
            D[i, lo:hi] = fornberg_weights(nodes[i], nodes[lo:hi], m)
    else:
        # barycentric differentiation (Berrut and Trefethen)
        diff = nodes[:, None] - nodes[None, :]
        np.fill_diagonal(diff, 1.0)
        w = 1.0 / np.prod(diff, axis=1)
        D1 = (w[None, :] / w[:, None]) / diff
        np.fill_diagonal(D1, 0.0)
        np.fill_diagonal(D1, -D1.sum(axis=1))
        D = np.linalg.matrix_power(D1, m) if m > 1 else D1
    _matrix_cache[key] = D
    return D


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _antiderivative(nodes, values, scheme):
    n = len(nodes)
    if scheme.kind == "cheb":
        a, b = nodes[0], nodes[-1]
        x = 2 * (nodes - a) / (b - a) - 1
        coef = np.polynomial.chebyshev.chebfit(x, values, n - 1)
        integ = np.polynomial.chebyshev.chebint(coef, lbnd=-1) * (b - a) / 2
        return np.polynomial.chebyshev.chebval(x, integ)
    width = min(scheme.order + 1, n)
    out = np.zeros(n)
    for i in range(n - 1):
        lo = min(max(i + 1 - width // 2, 0), n - width)
        hi = lo + width
        h = nodes[i + 1] - nodes[i]
        xq = nodes[i] + (1 + _GL_X) * h / 2
        acc = 0.0
        for xx, ww in zip(xq, _GL_W):
            acc += ww * np.dot(fornberg_weights(xx, nodes[lo:hi], 0), values[lo:hi])
        out[i + 1] = out[i] + acc * h / 2
    return out


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a real function on a strictly increasing grid."""

    nodes: np.ndarray
    values: np.ndarray
    scheme: Scheme = field(default_factory=Scheme)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape:
            raise GridMismatch("nodes and values must be 1-D and the same length")
        if len(nodes) < 8:
            raise GridMismatch("a grid needs at least 8 points")
        if np.any(np.diff(nodes) <= 0):
            raise GridMismatch("nodes must be strictly increasing")
        nodes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, f, nodes, scheme=None):
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, np.array([f(x) for x in nodes], dtype=float), scheme or Scheme())

    def like(self, values):
        return GridFunction(self.nodes, values, self.scheme)

    def check_grid(self, other):
        if not isinstance(other, GridFunction):
            return
        if other.nodes.shape != self.nodes.shape or not np.array_equal(other.nodes, self.nodes):
            raise GridMismatch("grid functions live on different grids")

    def d(self, m=1):
        return self.like(diff_matrix(self.nodes, m, self.scheme) @ self.values)

    def integral(self, c=0.0):
        """Antiderivative taking the value ``c`` at the left endpoint."""
        return self.like(c + _antiderivative(self.nodes, self.values, self.scheme))

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            self.check_grid(other)
            return self.like(op(self.values, other.values))
        return self.like(op(self.values, other))

    def __add__(self, o):
        return self._binary(o, np.add)

    __radd__ = __add__

    def __sub__(self, o):
        return self._binary(o, np.subtract)

    def __rsub__(self, o):
        return self._binary(o, lambda a, b: b - a)

    def __mul__(self, o):
        return self._binary(o, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._binary(o, np.divide)

    def __rtruediv__(self, o):
        return self._binary(o, lambda a, b: b / a)

    def __neg__(self):
        return self.like(-self.values)

    def __pow__(self, p):
        return self.like(self.values ** p)

    def sup(self, lo=-np.inf, hi=np.inf):
        mask = (self.nodes >= lo) & (self.nodes <= hi)
        return float(np.max(np.abs(self.values[mask])))

    def __len__(self):
        return len(self.nodes)


# ---------------------------------------------------------------------------
# constants

def _dfact(m):
    """Odd double factorial m!! for odd m >= -1."""
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


@dataclass(frozen=True)
class HierarchyConstants:
    k: int
    alpha: float
    tau: tuple
    z0: float
    beta: tuple
    g1: float
    g2: float
    eta: float
    c2: float

    def beta_at(self, j):
        """beta_j with out-of-range indices read as 0."""
        return self.beta[j] if 0 <= j < len(self.beta) else 0.0

    @property
    def large_s_exponent(self):
        return (2 * self.k - 1) / (2 * self.k + 1)

    @property
    def large_s_coefficient(self):
        return -(8 * self.k / (2 * self.k + 1)) * self.g1


def hierarchy_constants(k, alpha):
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer (k = 0 is the Bessel case)")
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    k = int(k)
    tau = [0.0] * (k + 1)
    tau[0] = float(4 ** (2 * k + 1) * k * k)
    tau[k] = float(-((-4) ** (k + 1)) * alpha * k)
    z0 = -((2 ** (k - 1) * factorial(k - 1) / _dfact(2 * k - 1)) ** (-2.0 / (2 * k + 1)))
    beta = tuple(
        (-1) ** (j + k - 1) * (-z0) ** (-1.5 - j) * _dfact(2 * j + 1) / (2 ** j * factorial(j))
        for j in range(k - 1))
    b = lambda j: beta[j] if 0 <= j < len(beta) else 0.0
    g1 = b(k - 2) - 1.5 * z0
    g2 = 0.375 * z0 ** 2 + b(k - 3) - 1.5 * z0 * b(k - 2)
    eta = 2 * k / (2 * k + 1)
    ssum = sum(_dfact(2 * j + 1) / (2 ** j * factorial(j)) for j in range(k))
    c2 = 1.5 ** (2 / 3) * (-z0) ** (-1 - 2 * k / 3) * ssum
    return HierarchyConstants(k, float(alpha), tuple(tau), z0, beta, g1, g2, eta, c2)


def g_stationary(z, k):
    """Large-s g-function (z - z0)**1.5 * p_{k-1}(z) / z**k."""
    c = hierarchy_constants(k, 0.0)
    z = complex(z)
    if z.imag == 0 and z.real <= c.z0:
        raise ValueError("g is cut along (-inf, z0]")
    if z == 0:
        raise ZeroDivisionError("g has a pole at 0")
    p = z ** (k - 1) + sum(bj * z ** j for j, bj in enumerate(c.beta))
    return (z - c.z0) ** 1.5 * p / z ** k


# ---------------------------------------------------------------------------
# hierarchy operators

def lenard_step(lj, u, c):
    """Next Lenard member, fixed by its value ``c`` at the left endpoint."""
    lj.check_grid(u)
    rhs = lj.d(3) + 4 * u * lj.d() + 2 * u.d() * lj
    return rhs.integral(c)


def _nonvanishing(f, what):
    v = f.values
    bad = np.flatnonzero(v == 0)
    if bad.size == 0:
        flips = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
        bad = flips
    if bad.size:
        raise HierarchySingularity(f"{what} vanishes on the grid", f.nodes[bad[0]])


def u_from_lk(lk, tau0):
    _nonvanishing(lk, "l_k")
    sq = lk * lk
    return -(sq.d(2) - 3 * lk.d() ** 2 + tau0) / (4 * sq)


def system_residual(k, ells, u, consts):
    """Residuals of the k+1 coupled equations, one GridFunction per p."""
    if len(ells) != k:
        raise ValueError(f"expected {k} functions l_1..l_k, got {len(ells)}")
    for f in ells:
        u.check_grid(f)
    zero = u.like(np.zeros(len(u)))
    ell = [u.like(u.nodes / 2)] + list(ells) + [zero]
    tau = consts.tau
    out = []
    for p in range(k + 1):
        acc = zero
        for q in range(p + 1):
            a, b = ell[k - p + q], ell[k - q]
            acc = acc + (ell[k - p + q + 1] * b - (a * b).d(2)
                         + 3 * a.d() * b.d() - 4 * u * a * b)
        out.append(acc - tau[p])
    return out


def piii_rhs(s, l, dl, tau0, tau1):
    return dl ** 2 / l - dl / s - l ** 2 / s - tau0 / l + tau1 / s


def piii_residual_k1(l1, tau0, tau1):
    """Residual l'' - rhs of the k = 1 member (a Painleve III equation)."""
    _nonvanishing(l1, "l_1")
    if np.any(l1.nodes <= 0):
        raise ValueError("the k = 1 equation needs s > 0")
    s = l1.like(l1.nodes)
    dl = l1.d()
    return l1.d(2) - piii_rhs(s, l1, dl, tau0, tau1)


def b_poly(z, s, ells):
    """b(z, s) = 4 (4z)^-(k+1) sum_j l_{k-j}(s) (4z)^j with l_0 = s/2."""
    if z == 0:
        raise ZeroDivisionError("b is singular at z = 0")
    k = len(ells)
    ell = [s / 2] + list(ells)
    w = 4 * z
    return 4 * w ** (-(k + 1)) * sum(ell[k - j] * w ** j for j in range(k + 1))


def b_grid(z, ells):
    """b(z, .) sampled on the common grid of ``ells`` (complex values)."""
    s = ells[0].nodes
    vals = b_poly(z, s, [f.values for f in ells])
    return vals


def lax_compat_residual(b, u, z):
    """Residual of d_s c - 1 - 2 (z - u) a with a, c built from b.

    ``b`` may be a GridFunction (real z) or a complex array on ``u``'s grid.
    """
    if isinstance(b, GridFunction):
        u.check_grid(b)
        bv = b.values
    else:
        bv = np.asarray(b)
        if bv.shape != u.values.shape:
            raise GridMismatch("b and u live on different grids")
    D = lambda m: diff_matrix(u.nodes, m, u.scheme)
    uv = u.values
    a = -0.5 * (D(1) @ bv)
    c = (z - uv) * bv - 0.5 * (D(2) @ bv)
    res = D(1) @ c - 1 - 2 * (z - uv) * a
    if np.iscomplexobj(res):
        return res
    return u.like(res)


# ---------------------------------------------------------------------------
# reference k = 1 solution and refinement study

def piii_reference_solution(alpha, s0=1.0, s1=3.0, l0=-4.0, dl0=0.0):
    """Dense high-accuracy solution of the k = 1 equation on [s0, s1].

    The default data give a solution that stays regular on [1, 3] for the
    alpha values used in the test-suite.
    """
    from scipy.integrate import solve_ivp

    c = hierarchy_constants(1, alpha)
    tau0, tau1 = c.tau

    def rhs(s, y):
        return [y[1], piii_rhs(s, y[0], y[1], tau0, tau1)]

    sol = solve_ivp(rhs, (s0, s1), [l0, dl0], method="DOP853",
                    rtol=1e-13, atol=1e-13, dense_output=True)
    if not sol.success:
        raise HierarchySingularity(sol.message, s0)
    return lambda s: sol.sol(s)[0]


def refinement_study(alpha=0.3, sizes=(20, 40, 80, 160), scheme=None, s0=1.0, s1=3.0):
    """Sup-residuals on a verified k = 1 solution for growing grids.

    Keys: 'system' (both equations of the coupled system), 'lenard' (l_1
    regenerated from l_0 by the Lenard step), 'piii' and 'compat' (Lax
    compatibility at z = 1.5).  Edge nodes are excluded from each sup.
    """
    scheme = scheme or Scheme("fd", 6)
    sol = piii_reference_solution(alpha, s0, s1)
    consts = hierarchy_constants(1, alpha)
    tau0, tau1 = consts.tau
    out = {key: [] for key in ("system", "lenard", "piii", "compat")}
    for N in sizes:
        nodes = np.linspace(s0, s1, N + 1) if scheme.kind == "fd" else chebyshev_nodes(s0, s1, N + 1)
        l1 = GridFunction.sample(sol, nodes, scheme)
        u = u_from_lk(l1, tau0)
        lo, hi = s0 + 0.1 * (s1 - s0), s1 - 0.1 * (s1 - s0)
        res = system_residual(1, [l1], u, consts)
        out["system"].append(max(r.sup(lo, hi) for r in res))
        l0 = l1.like(nodes / 2)
        regen = lenard_step(l0, u, l1.values[0])
        out["lenard"].append((regen - l1).sup(lo, hi))
        out["piii"].append(piii_residual_k1(l1, tau0, tau1).sup(lo, hi))
        b = b_poly(1.5, nodes, [l1.values])
        cres = lax_compat_residual(l1.like(b), u, 1.5)
        out["compat"].append(cres.sup(lo, hi))
    return out
