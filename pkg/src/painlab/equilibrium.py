"""Equilibrium measure of the Laguerre potential V(x) = x.

The density is sought in the one-cut hard-edge family

    psi(x) = (c / 2 pi) sqrt((b - x) / x),   0 < x < b,

(so the analytic factor is the constant h = c) and the pair (b, c) is
solved for numerically from unit mass and the Euler-Lagrange equality.
Logarithmic integrals use x = b sin^2(theta), which turns psi(x) dx into
(c b / pi) cos^2(theta) d(theta).
"""

from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp

DIGITS = 30


def V(x):
    return x


def _log_potential(x, b, c):
    """2 * int log|x - y| psi(y) dy - V(x) for real x."""
    x, b = mp.mpf(x), mp.mpf(b)
    f = lambda th: mp.log(abs(x - b * mp.sin(th) ** 2)) * mp.cos(th) ** 2
    pts = [0, mp.pi / 2]
    if 0 < x < b:
        pts = [0, mp.asin(mp.sqrt(x / b)), mp.pi / 2]
    return 2 * c * b / mp.pi * mp.quad(f, pts) - V(x)


@dataclass(frozen=True)
class EquilibriumMeasure:
    b: object
    c: object
    ell: object
    digits: int = DIGITS

    def h(self, x):
        return self.c

    def density(self, x):
        x = mp.mpf(x)
        if not 0 < x < self.b:
            return mp.mpf(0)
        return self.h(x) / (2 * mp.pi) * mp.sqrt((self.b - x) / x)

    @property
    def c1(self):
        """Hard-edge scaling constant b h(0)^2."""
        return self.b * self.h(0) ** 2

    def mass(self):
        with mp.workdps(self.digits):
            return self.c * self.b / mp.pi * mp.quad(lambda th: mp.cos(th) ** 2, [0, mp.pi / 2])

    def moment(self, j):
        with mp.workdps(self.digits):
            f = lambda th: (self.b * mp.sin(th) ** 2) ** j * mp.cos(th) ** 2
            return self.c * self.b / mp.pi * mp.quad(f, [0, mp.pi / 2])

    def variational_residual(self, x):
        """2 int log|x-y| dmu(y) - V(x) - ell: zero on [0, b], negative beyond."""
        with mp.workdps(self.digits):
            return _log_potential(x, self.b, self.c) - self.ell

    # complex-analytic functions ------------------------------------------

    def _check_cut(self, z):
        z = mp.mpc(z)
        if z.imag == 0 and z.real <= self.b:
            raise ValueError("evaluation on the cut (-inf, b]")
        return z

    def g(self, z):
        """g(z) = int log(z - x) dmu(x), principal logarithm."""
        with mp.workdps(self.digits):
            z = self._check_cut(z)
            f = lambda th: mp.log(z - self.b * mp.sin(th) ** 2) * mp.cos(th) ** 2
            pts = [0, mp.pi / 2]
            if 0 < z.real < self.b:
                pts = [0, mp.asin(mp.sqrt(z.real / self.b)), mp.pi / 2]
            return self.c * self.b / mp.pi * mp.quad(f, pts)

    def R(self, z):
        return mp.sqrt((z - self.b) / z)

    def xi(self, z):
        """xi(z) = -1/2 int_b^z h R along the straight segment from b."""
        with mp.workdps(self.digits):
            z = self._check_cut(z)
            d = z - self.b
            f = lambda tau: self.h(self.b + tau * d) * self.R(self.b + tau * d)
            # split where the segment passes closest to the branch point 0
            near = mp.re(-self.b * mp.conj(d)) / abs(d) ** 2
            pts = [0, near, 1] if 0 < near < 1 else [0, 1]
            return -d / 2 * mp.quad(f, pts)

    def conformal_f(self, z, radius=None):
        """f(z) = (1/4) (int_0^z h R)^2, analytic for |z| < b/2.

        With s = z tau^2 the integral is 2 i sqrt(z) int_0^1 h sqrt(b - z tau^2)
        d(tau) up to a sign, and f = -z (int_0^1 h(z tau^2) sqrt(b - z tau^2))^2
        is manifestly analytic in the disk.
        """
        radius = self.b / 2 if radius is None else radius
        with mp.workdps(self.digits):
            z = mp.mpc(z)
            if abs(z) >= radius:
                raise ValueError(f"|z| = {abs(z)} outside the validated disk |z| < {radius}")
            f = lambda tau: self.h(z * tau ** 2) * mp.sqrt(self.b - z * tau ** 2)
            return -z * mp.quad(f, [0, 1]) ** 2

    def f_prime0(self):
        """Analytic value of f'(0) = -b h(0)^2."""
        return -self.c1


@lru_cache(maxsize=None)
def laguerre_equilibrium(digits=DIGITS):
    """Solve mass = 1 and flatness of the Euler-Lagrange potential for (b, c)."""
    with mp.workdps(digits + 10):
        def eqs(b, c):
            mass = c * b / 4
            flat = _log_potential(b / 4, b, c) - _log_potential(3 * b / 4, b, c)
            return [mass - 1, flat]

        b, c = mp.findroot(eqs, (mp.mpf(1), mp.mpf(1)))
        ell = _log_potential(b / 2, b, c)
    return EquilibriumMeasure(+b, +c, +ell, digits)


def hard_edge_constant(scaling_mode="with_c1"):
    """The constant C in s = 2^(-1/k) C n^((2k+1)/k) t for the chosen mode."""
    if scaling_mode == "with_c1":
        return laguerre_equilibrium().c1
    if scaling_mode == "without_c1":
        return mp.mpf(1)
    raise ValueError(f"unknown scaling mode {scaling_mode!r}")
