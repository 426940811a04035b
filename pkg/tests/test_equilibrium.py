import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from painlab.equilibrium import hard_edge_constant, laguerre_equilibrium

from oracles import marchenko_pastur_density


@pytest.fixture(scope="module")
def eq():
    return laguerre_equilibrium()


def test_solved_parameters(eq):
    # frozen: closed-form Marchenko-Pastur values for V(x) = x
    assert abs(eq.b - 4) < 1e-25
    assert abs(eq.c - 1) < 1e-25
    assert abs(eq.ell + 2) < 1e-20
    assert abs(eq.c1 - 4) < 1e-25


def test_density_matches_marchenko_pastur(eq):
    xs = np.linspace(0.05, 3.95, 40)
    ours = np.array([float(eq.density(x)) for x in xs])
    assert np.max(np.abs(ours - marchenko_pastur_density(xs))) < 1e-14


def test_mass_and_first_moment(eq):
    assert abs(eq.mass() - 1) < 1e-25
    assert abs(eq.moment(1) - 1) < 1e-25


@settings(max_examples=10, deadline=None)
@given(st.floats(0.01, 3.99))
def test_variational_equality_on_support(x):
    eq = laguerre_equilibrium()
    assert abs(eq.variational_residual(x)) < 1e-18


@pytest.mark.parametrize("x", [4.5, 6.0, 8.0])
def test_variational_inequality_off_support(eq, x):
    assert eq.variational_residual(x) < 0


def test_g_function_identities(eq):
    with mp.workdps(30):
        R = mp.mpf(1000)
        assert abs(eq.g(R) - mp.log(R) + 1 / R) < 1e-5
        z = mp.mpc(1.3, 0.8)
        # 2 xi - 2 g + V + ell vanishes off the cut
        assert abs(2 * eq.xi(z) - 2 * eq.g(z) + z + eq.ell) < 1e-15
        with pytest.raises(ValueError):
            eq.g(2.0)


def test_conformal_map_at_hard_edge(eq):
    with mp.workdps(30):
        h = mp.mpf(10) ** -8
        fp = (eq.conformal_f(h) - eq.conformal_f(-h)) / (2 * h)
        assert abs(fp - eq.f_prime0()) < 1e-12
        assert eq.f_prime0() == -4
        with pytest.raises(ValueError):
            eq.conformal_f(3.0)


def test_conformal_map_matches_xi(eq):
    # e^{n sqrt f} = (-1)^n e^{n xi} just left of the hard edge
    with mp.workdps(30):
        x, n = mp.mpf(-0.01), 7
        lhs = mp.exp(n * mp.sqrt(eq.conformal_f(x)))
        rhs = (-1) ** n * mp.exp(n * eq.xi(mp.mpc(x, mp.mpf(10) ** -28)))
        assert abs(lhs - rhs) / abs(lhs) < 1e-15


def test_hard_edge_constant_modes():
    assert hard_edge_constant("without_c1") == 1
    assert abs(hard_edge_constant("with_c1") - 4) < 1e-20
    with pytest.raises(ValueError):
        hard_edge_constant("other")
