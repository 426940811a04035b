import mpmath as mp
import numpy as np
import pytest

from painlab import kernel_limits as kl
from painlab import specfun as sf
from painlab.orthopoly import PerturbedWeight, build_op_system, cd_kernel

from oracles import airy_kernel_scipy, bessel_half_kernel


@pytest.fixture(scope="module")
def sample32():
    return kl.finite_n_sample(32, 1, 0.0, 1.0, (-2.0, -1.0, -0.5))


def test_finite_n_kernel_is_symmetric_with_positive_diagonal(sample32):
    assert sample32.is_symmetric()
    assert np.all(np.diag(sample32.values) > 0)
    # 2x2 minors of a positive kernel are non-negative
    V = sample32.values
    assert V[0, 0] * V[1, 1] - V[0, 1] ** 2 > 0


def test_kernel_matrix_matches_pointwise_formula():
    w = PerturbedWeight("pLUE", 6, 1, 0.3, 0.01, prec=60)
    sys = build_op_system(w, 6)
    K = kl.kernel_matrix(sys, 6, [0.2, 1.3])
    assert abs(K[0][1] - cd_kernel(sys, 6, 0.2, 1.3)) < 1e-40
    assert abs(K[1][1] - cd_kernel(sys, 6, 1.3, 1.3)) < 1e-40


def test_self_convergence_in_n():
    grid = (-2.0, -0.5)
    K = {n: kl.finite_n_sample(n, 1, 0.0, 1.0, grid).values for n in (16, 32, 64)}
    d1, d2 = np.abs(K[16] - K[32]).max(), np.abs(K[32] - K[64]).max()
    assert d1 / d2 > 1.5


def test_half_alpha_limit_against_closed_form():
    # J_{1/2} is elementary; compare at tiny s
    grid = (-2.0, -0.5)
    fin = kl.finite_n_sample(64, 1, 0.5, 1e-8, grid).values
    ref = np.array([[bessel_half_kernel(-u, -v) for v in grid] for u in grid])
    assert np.max(np.abs(fin - ref)) < 1e-3


def test_bessel_residual_shrinks_with_s():
    r2 = kl.bessel_limit_residual(32, 1, 0.0, 1e-2)
    r3 = kl.bessel_limit_residual(32, 1, 0.0, 1e-3)
    assert r3 < r2


def test_limit_samples_match_scipy():
    b = kl.bessel_sample(0.5, (-1.0, -2.0))
    assert b.values[0, 1] == pytest.approx(bessel_half_kernel(1.0, 2.0), rel=1e-12)
    assert b.values[0, 1] == pytest.approx(0.09317873357887156, rel=1e-12)
    a = kl.airy_sample((0.0, 0.5))
    assert a.values[0, 0] == pytest.approx(0.06698748377966399, rel=1e-13)
    assert a.values[0, 1] == pytest.approx(airy_kernel_scipy(0.0, 0.5), rel=1e-12)


def test_airy_points_center_on_z0():
    pts, pref, c = kl.airy_points(1, 0.0, 1000, [0.0])
    assert abs(pts[0] - 1000 ** c["eta"] * c["z0"]) < 1e-20
    assert pref > 0


def test_airy_heuristic_and_domain_checks():
    assert kl.airy_n_heuristic(100) == 64
    assert kl.airy_n_heuristic(1e6) == 2000
    with pytest.raises(ValueError):
        kl.airy_limit_residual(64, 1, 0.0, 10)
    with pytest.raises(sf.DomainError):
        kl.airy_limit_residual(64, 1, 0.0, 100, grid=(-1.0, 60.0))
    with pytest.raises(sf.DomainError):
        kl.airy_limit_residual(8, 1, 0.0, 1000)


def test_airy_residual_decreases_with_s():
    res = [kl.airy_limit_residual(None, 1, 0.0, s) for s in (100, 1000)]
    assert res[1] < res[0]


def test_scaled_arguments_must_be_negative():
    with pytest.raises(sf.DomainError):
        kl.rescaled_grid(8, 1, 0.0, 1.0, [-1.0, 0.5])
    with pytest.raises(ValueError):
        kl.bessel_limit_residual(16, 1, 0.0, 0.5)
    with pytest.raises(ValueError):
        kl.KernelSample("other", {}, [], [], np.zeros((0, 0)))


def test_sample_rows():
    b = kl.bessel_sample(0.0, (-1.0, -2.0))
    rows = list(b.rows())
    assert rows[0] == ["u", "v", "value"] and len(rows) == 5


def test_rescaled_trace_counts_eigenvalues():
    # the rescaled density integrates to n over the negative half-line
    n = 6
    sys, _ = kl._system(n, 1, 0.3, 1.0, "with_c1", None)
    scale = 4 * n ** 2
    f = lambda u: kl.kernel_matrix(sys, n, [-u / scale])[0][0] / scale
    with mp.workdps(30):
        tot = mp.quad(f, [-mp.inf, -800, -100, -10, -1, -0.01, 0])
    assert abs(tot - n) < 1e-10
