import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from painlab import hierarchy as hy


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5), st.floats(-0.4, 0.4))
def test_fornberg_weights_exact_on_polynomials(deg, x0):
    x = np.linspace(-1, 1, 7)
    p = np.polynomial.Polynomial(np.arange(1, deg + 2, dtype=float))
    for m in (1, 2):
        w = hy.fornberg_weights(x0, x, m)
        assert np.dot(w, p(x)) == pytest.approx(p.deriv(m)(x0), abs=1e-8)


@pytest.mark.parametrize("scheme", [hy.Scheme("fd", 6), hy.Scheme("cheb")])
def test_derivative_and_antiderivative_of_sine(scheme):
    nodes = np.linspace(0, 2, 61) if scheme.kind == "fd" else hy.chebyshev_nodes(0, 2, 30)
    f = hy.GridFunction.sample(np.sin, nodes, scheme)
    assert np.max(np.abs(f.d().values - np.cos(nodes))) < 1e-6
    assert np.max(np.abs(f.d(2).values + np.sin(nodes))) < 1e-4
    F = f.integral(0.0)
    assert np.max(np.abs(F.values - (1 - np.cos(nodes)))) < 1e-8


def test_grid_function_contracts():
    with pytest.raises(hy.GridMismatch):
        hy.GridFunction(np.linspace(0, 1, 5), np.zeros(5))
    with pytest.raises(hy.GridMismatch):
        hy.GridFunction(np.linspace(1, 0, 10), np.zeros(10))
    a = hy.GridFunction.sample(np.exp, np.linspace(0, 1, 10))
    b = hy.GridFunction.sample(np.exp, np.linspace(0, 2, 10))
    with pytest.raises(hy.GridMismatch):
        a + b
    with pytest.raises(ValueError):
        hy.Scheme("fd", 2)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.9, 3.0))
def test_constants_k1(alpha):
    c = hy.hierarchy_constants(1, alpha)
    assert c.tau == (64.0, pytest.approx(-16 * alpha))
    assert c.z0 == -1.0 and c.beta == ()
    assert c.g1 == 1.5 and c.g2 == 0.375
    assert c.c2 == pytest.approx(1.5 ** (2 / 3))
    assert c.large_s_coefficient == pytest.approx(-4.0)


def test_constants_k2_k3_frozen():
    c2 = hy.hierarchy_constants(2, 0.3)
    assert c2.z0 == pytest.approx(-(1.5 ** 0.4), rel=1e-14)
    assert c2.tau == (4096.0, 0.0, pytest.approx(38.4))
    assert c2.beta[0] == pytest.approx(-0.7840526816831157, rel=1e-12)
    assert c2.c2 == pytest.approx(1.5 ** (2 / 3) * (-c2.z0) ** (-1 - 4 / 3) * 2.5, rel=1e-12)
    assert c2.large_s_exponent == pytest.approx(0.6)
    c3 = hy.hierarchy_constants(3, 0.3)
    assert c3.tau == (147456.0, 0.0, 0.0, pytest.approx(-230.4))
    assert c3.z0 == pytest.approx(-1.19674, abs=1e-5)
    assert c3.beta == (pytest.approx(0.76383, abs=1e-5), pytest.approx(-0.95739, abs=1e-5))
    assert c3.eta == pytest.approx(6 / 7)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_g_function_pole_cancels(k):
    # g(z) - (-1)^(k+1) z^-k stays bounded as z -> 0
    c = hy.hierarchy_constants(k, 0.0)
    vals = [abs(hy.g_stationary(z, k) - (-1) ** (k + 1) * z ** -k) for z in (1e-2, 1e-3, 1e-4)]
    assert max(vals) < 5 and abs(vals[-1] - vals[-2]) < 0.05
    assert c.z0 < 0


def test_constants_reject_bad_input():
    with pytest.raises(ValueError):
        hy.hierarchy_constants(0, 0.0)
    with pytest.raises(ValueError):
        hy.hierarchy_constants(1, -1.5)


def test_residuals_vanish_on_reference_solution():
    study = hy.refinement_study(0.3, sizes=(40, 80))
    for key, vals in study.items():
        assert vals[1] < vals[0]
        assert vals[1] < 1e-4, key


def test_chebyshev_scheme_is_spectral():
    study = hy.refinement_study(0.3, sizes=(16, 24), scheme=hy.Scheme("cheb"))
    assert study["system"][1] < 1e-8
    assert study["piii"][1] < 1e-8


def test_p0_equation_defines_u():
    # the first equation of the system is satisfied by construction of u
    nodes = np.linspace(1, 3, 81)
    sol = hy.piii_reference_solution(0.3)
    l1 = hy.GridFunction.sample(sol, nodes)
    u = hy.u_from_lk(l1, 64.0)
    r0 = hy.system_residual(1, [l1], u, hy.hierarchy_constants(1, 0.3))[0]
    assert r0.sup() < 1e-10


def test_singular_lk_is_reported():
    nodes = np.linspace(-1, 1, 20)
    lk = hy.GridFunction.sample(lambda s: s, nodes)
    with pytest.raises(hy.HierarchySingularity) as info:
        hy.u_from_lk(lk, 64.0)
    assert -0.2 < info.value.location < 0.2


def test_b_poly_k1_formula():
    # b = 4 (4z)^-2 (l1 + 4z l0) with l0 = s/2
    z, s, l1 = 0.7 + 0.2j, 1.3, -2.5
    assert hy.b_poly(z, s, [l1]) == pytest.approx(l1 / (4 * z * z) + s / (2 * z))
    with pytest.raises(ZeroDivisionError):
        hy.b_poly(0, s, [l1])


def test_lax_compatibility_complex_z():
    nodes = np.linspace(1, 3, 121)
    l1 = hy.GridFunction.sample(hy.piii_reference_solution(0.3), nodes)
    u = hy.u_from_lk(l1, 64.0)
    b = hy.b_grid(0.4 + 0.9j, [l1])
    res = hy.lax_compat_residual(b, u, 0.4 + 0.9j)
    assert np.iscomplexobj(res)
    assert np.max(np.abs(res[10:-10])) < 1e-5
