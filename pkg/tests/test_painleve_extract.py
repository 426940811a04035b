import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from painlab import hierarchy as hy
from painlab import painleve_extract as pe


def test_s_to_t_hand_value():
    # 2 * 10 / (1 * 1^3) for n = 1, k = 1 without the hard-edge constant
    assert pe.s_to_t(1, 1, 10, "without_c1") == 20
    assert abs(pe.s_to_t(10, 1, 1, "without_c1") - mp.mpf("0.002")) < 1e-30
    assert abs(pe.s_to_t(10, 1, 1, "with_c1") - mp.mpf("0.0005")) < 1e-30


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 512), st.integers(1, 4), st.floats(1e-6, 1e6), st.sampled_from(pe.SCALING_MODES))
def test_s_t_round_trip(n, k, s, mode):
    with mp.workdps(40):
        assert abs(pe.t_to_s(n, k, pe.s_to_t(n, k, s, mode), mode) / s - 1) < 1e-35


def test_doubling_n_rescales_t():
    for k in (1, 2, 3):
        ratio = pe.s_to_t(16, k, 3.0) / pe.s_to_t(32, k, 3.0)
        assert abs(ratio - mp.mpf(2) ** (mp.mpf(2 * k + 1) / k)) < 1e-30


def test_unknown_scaling_mode():
    with pytest.raises(ValueError):
        pe.s_to_t(4, 1, 1.0, "bogus")


def test_r0_values():
    assert pe.r0(0) == mp.mpf(1) / 8
    assert pe.r0(0.5) == 0


def test_constant_r_has_zero_y():
    s = pe.log_grid(0.1, 10, 12)
    _, y = pe.y_from_r(s, [0.3] * len(s))
    assert np.max(np.abs(y)) < 1e-12


def test_linear_in_log_s():
    s = pe.log_grid(0.1, 10, 16)
    for method in ("fornberg", "cubic"):
        d = pe.dlog_derivative(s, 2.5 * np.log(s), method)
        assert np.max(np.abs(d - 2.5)) < 1e-9


def test_coarse_grid_is_rejected():
    with pytest.raises(ValueError):
        pe.y_from_r(pe.log_grid(0.1, 10, 6), [0.0] * 13)
    with pytest.raises(ValueError):
        pe.y_from_r([1, 2, 3], [0, 0, 0])


def test_r_from_y_inverts_y_from_r():
    sigma = np.linspace(0.01, 2, 400)
    r = 0.125 - 0.3 * sigma ** 4
    y = 2.4 * sigma ** 3        # -2 d/dsigma of r
    assert np.max(np.abs(pe.r_from_y(sigma, y, 0.0) - r)) < 1e-4


@pytest.fixture(scope="module")
def synthetic():
    # r built from an independently integrated PIII solution
    sol = hy.piii_reference_solution(0.3)
    s = pe.log_grid(1.0, 9.0, 48)
    r = [-0.5 * quad(sol, 1, np.sqrt(x), epsabs=1e-13, epsrel=1e-13)[0] for x in s]
    return sol, s, r


def test_y_recovers_injected_solution(synthetic):
    sol, s, r = synthetic
    sigma, y = pe.y_from_r(s, r)
    assert np.max(np.abs(y - sol(sigma))[4:-4]) < 1e-6


def test_injected_solution_has_small_piii_residual(synthetic):
    sol, s, r = synthetic
    sigma, y = pe.y_from_r(s, r)
    res = pe.piii_residual_extracted(sigma, y, 0.3, 1.2, 2.8).sup()
    ref = pe.piii_residual_extracted(sigma, sol(sigma), 0.3, 1.2, 2.8).sup()
    assert res < 1e-3
    assert abs(res - ref) < 1e-6
    # the wrong alpha is visible
    assert pe.piii_residual_extracted(sigma, y, 0.6, 1.2, 2.8).sup() > 0.1


def test_zero_ell1_raises():
    sigma = np.linspace(0.6, 4, 40)
    with pytest.raises(hy.HierarchySingularity):
        pe.piii_residual_extracted(sigma, np.zeros_like(sigma), 0.0)


def test_scaling_mode_selection():
    mode, slopes = pe.select_scaling_mode()
    assert mode == "with_c1"
    assert abs(slopes["with_c1"] - 2) < 0.2


def test_small_s_deviation_is_linear():
    s = pe.log_grid(1e-3, 1e-2, 12)
    dev = pe.extract_r(1, 0.3, s, 32, deviation=True)
    e, _ = pe.fit_power_law(s, [float(d) for d in dev])
    assert abs(e - 1) < 0.15


def test_half_alpha_value_settles_near_r0():
    r = [pe.extract_r(1, 0.5, [1e-2], n)[0] for n in (8, 16, 32)]
    assert abs(r[1] - r[2]) < abs(r[0] - r[1])
    assert abs(r[2] - pe.r0(0.5)) < 0.02


def test_drift_correction_changes_rate():
    s = [0.5]
    plain = [pe.extract_r(1, 0.0, s, n)[0] for n in (8, 16, 32)]
    fixed = [pe.extract_r(1, 0.0, s, n, drift_correction=True)[0] for n in (8, 16, 32)]
    rp = abs(plain[0] - plain[1]) / abs(plain[1] - plain[2])
    rf = abs(fixed[0] - fixed[1]) / abs(fixed[1] - fixed[2])
    assert 1.5 < rp < 2.5
    assert rf > 3


def test_richardson_removes_first_order_error():
    exact = 1.0
    f = lambda n: exact + 3.0 / n + 5.0 / n ** 2
    (r,) = pe.richardson([f(64)], [f(128)])
    assert abs(r - exact) < abs(f(128) - exact) / 30


def test_table_rows_and_fit():
    s = pe.log_grid(0.2, 2, 12)
    tab = pe.build_table(1, 0.0, s, [8, 16])
    rows = list(tab.rows())
    assert rows[0][0] == "s" and len(rows) == len(s) + 1
    assert tab.r_extrap is not None and tab.ell1 is not None
    with pytest.raises(ValueError):
        pe.verify_large_s(tab, 20, 200)


def test_extract_rejects_nonpositive_s():
    with pytest.raises(ValueError):
        pe.extract_r(1, 0.0, [0.0], 8)
