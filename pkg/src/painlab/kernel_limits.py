"""Hard-edge rescaled correlation kernels and their Bessel and Airy limits.

Sign convention: the scaled variables u, v are negative and map to the
physical points x = -u / (c1 n^2) > 0.  The soft-edge points
U = s^eta (z0 + s^(-eta/3) u / c2) are also negative (z0 < 0), so both
limits are taken through the same rescaled kernel.
"""

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from . import specfun
from .equilibrium import hard_edge_constant
from .hierarchy import hierarchy_constants
from .orthopoly import PerturbedWeight, build_op_system, op_eval
from .painleve_extract import extraction_prec, s_to_t

MODES = ("finite_n", "bessel", "airy")
DEFAULT_GRID = (-5.0, -2.0, -1.0, -0.5, -0.1)


@dataclass
class KernelSample:
    mode: str
    params: dict
    u: list
    v: list
    values: np.ndarray
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    def is_symmetric(self, tol=1e-12):
        V = self.values
        return V.shape[0] == V.shape[1] and np.allclose(V, V.T, rtol=tol, atol=tol * np.abs(V).max())

    def rows(self):
        yield ["u", "v", "value"]
        for i, a in enumerate(self.u):
            for j, b in enumerate(self.v):
                yield [repr(float(a)), repr(float(b)), repr(float(self.values[i, j]))]


def _c1(scaling_mode):
    return hard_edge_constant(scaling_mode)


def kernel_matrix(sys, n, xs):
    """K_n(x_i, x_j) for all pairs, sharing the polynomial evaluations."""
    w = sys.weight
    with mp.workdps(sys.prec):
        xs = [mp.mpf(x) for x in xs]
        pn = [op_eval(sys, n, x, True) for x in xs]
        pm = [op_eval(sys, n - 1, x, True) for x in xs]
        lw = [w.log_w(x) for x in xs]
        hn1 = sys.norms[n - 1]
        m = len(xs)
        K = [[None] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                if xs[i] == xs[j]:
                    val = mp.exp(lw[i]) * (pn[i][1] * pm[i][0] - pm[i][1] * pn[i][0]) / hn1
                else:
                    num = pn[i][0] * pm[j][0] - pn[j][0] * pm[i][0]
                    val = mp.exp((lw[i] + lw[j]) / 2) * num / (hn1 * (xs[i] - xs[j]))
                K[i][j] = K[j][i] = val
    return K


def _system(n, k, alpha, s, scaling_mode, prec):
    t = s_to_t(n, k, s, scaling_mode) if s else mp.mpf(0)
    w = PerturbedWeight("pLUE", n, k, alpha, t, prec=prec or extraction_prec(n))
    return build_op_system(w, n, verify=False), t


def rescaled_grid(n, k, alpha, s, us, scaling_mode="with_c1", prec=None):
    """Matrix of (1/(c1 n^2)) K_n(-u/(c1 n^2), -v/(c1 n^2); t(s)) over us x us."""
    if any(not u < 0 for u in us):
        raise specfun.DomainError("scaled arguments must be negative")
    c1 = _c1(scaling_mode)
    scale = c1 * mp.mpf(n) ** 2
    sys, t = _system(n, k, alpha, s, scaling_mode, prec)
    K = kernel_matrix(sys, n, [-mp.mpf(u) / scale for u in us])
    vals = np.array([[float(x / scale) for x in row] for row in K])
    return vals, {"t": t, "c1": c1}


def rescaled_kernel(n, k, alpha, s, u, v, scaling_mode="with_c1", prec=None):
    """One entry of the rescaled kernel (see :func:`rescaled_grid`)."""
    vals, _ = rescaled_grid(n, k, alpha, s, [u, v], scaling_mode, prec)
    return vals[0, 1]


def finite_n_sample(n, k, alpha, s, grid=DEFAULT_GRID, scaling_mode="with_c1", prec=None):
    vals, consts = rescaled_grid(n, k, alpha, s, grid, scaling_mode, prec)
    params = {"n": n, "k": k, "alpha": alpha, "s": s, "t": consts["t"]}
    return KernelSample("finite_n", params, list(grid), list(grid), vals, {"c1": consts["c1"]})


def bessel_sample(alpha, grid=DEFAULT_GRID):
    vals = np.array([[float(specfun.bessel_kernel(alpha, -u, -v)) for v in grid] for u in grid])
    return KernelSample("bessel", {"alpha": alpha}, list(grid), list(grid), vals)


def airy_sample(grid):
    vals = np.array([[float(specfun.airy_kernel(u, v)) for v in grid] for u in grid])
    return KernelSample("airy", {}, list(grid), list(grid), vals)


def bessel_limit_residual(n, k, alpha, s_small, grid=DEFAULT_GRID,
                          scaling_mode="with_c1", relative=True, prec=None):
    """sup |rescaled kernel - J_alpha(-u, -v)|, relative to max |J| by default."""
    if s_small > 1e-2:
        raise ValueError("the Bessel limit needs s <= 1e-2")
    fin = finite_n_sample(n, k, alpha, s_small, grid, scaling_mode, prec)
    ref = bessel_sample(alpha, grid)
    res = float(np.max(np.abs(fin.values - ref.values)))
    return res / float(np.max(np.abs(ref.values))) if relative else res


def airy_n_heuristic(s, k=1):
    """Matrix size used at a given s for the soft-edge limit (overridable)."""
    return max(64, 8 * math.ceil(2 * float(s) ** 0.5 / 8))


def airy_points(k, alpha, s, us):
    """PIII-variable points s^eta (z0 + s^(-eta/3) u / c2) and the prefactor."""
    c = hierarchy_constants(k, alpha)
    eta, z0, c2 = mp.mpf(c.eta), mp.mpf(c.z0), mp.mpf(c.c2)
    s = mp.mpf(s)
    pts = [s ** eta * (z0 + s ** (-eta / 3) * mp.mpf(u) / c2) for u in us]
    return pts, s ** (2 * eta / 3) / c2, {"eta": eta, "z0": z0, "c2": c2}


def airy_limit_residual(n, k, alpha, s_large, grid=(-1.0, 0.0, 1.0),
                        scaling_mode="with_c1", prec=None):
    """sup |(s^(2 eta/3)/c2) K(U, V; s) - A(u, v)| over the grid.

    ``n=None`` uses :func:`airy_n_heuristic`.
    """
    if s_large < 100:
        raise ValueError("the Airy limit needs s >= 100")
    n = n or airy_n_heuristic(s_large, k)
    pts, pref, consts = airy_points(k, alpha, s_large, grid)
    if any(not p < 0 for p in pts):
        raise specfun.DomainError("grid leaves the negative half-line; shrink it or raise s")
    c1 = _c1(scaling_mode)
    if max(-p for p in pts) / (c1 * n ** 2) > 0.25:
        raise specfun.DomainError("n too small: points leave the hard-edge window")
    vals, _ = rescaled_grid(n, k, alpha, s_large, pts, scaling_mode, prec)
    ref = airy_sample(list(grid)).values
    return float(np.max(np.abs(float(pref) * vals - ref)))
