import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from painlab import ensemble_mc as mc


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.01, 10), min_size=2, max_size=6, unique=True), st.randoms())
def test_density_is_permutation_invariant(xs, rnd):
    p = mc.Params(len(xs), 2, 0.4, 0.05)
    perm = list(xs)
    rnd.shuffle(perm)
    assert mc.log_joint_density(perm, p) == pytest.approx(mc.log_joint_density(xs, p), abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 20), st.floats(-0.9, 2), st.floats(0, 1), st.integers(1, 3))
def test_single_particle_is_the_weight(x, alpha, t, k):
    p = mc.Params(1, k, alpha, t)
    assert mc.log_joint_density([x], p) == pytest.approx(alpha * np.log(x) - x - (t / x) ** k)


def test_hand_value():
    # 2 log|1 - 2| - 2 (1 + 2)
    assert mc.log_joint_density([1.0, 2.0], mc.Params(2)) == pytest.approx(-6.0)


def test_out_of_support_sentinel():
    p = mc.Params(2, 1, 0.0, 0.1)
    assert mc.log_joint_density([-1.0, 2.0], p) == -np.inf
    assert mc.log_joint_density([1.0, 1.0], p) == -np.inf
    assert mc.log_joint_density([0.0, 1.0], p) == -np.inf


def test_invalid_params():
    for bad in (dict(n=0), dict(n=2, alpha=-1.0), dict(n=2, t=-0.1)):
        with pytest.raises(ValueError):
            mc.Params(**bad)


def test_same_seed_same_chain():
    p = mc.Params(4, 1, 0.0, 0.01)
    a = mc.mh_chain(p, 300, seed=5, chains=2)
    b = mc.mh_chain(p, 300, seed=5, chains=2)
    c = mc.mh_chain(p, 300, seed=6, chains=2)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_two_state_detailed_balance():
    steps = 1_000_000
    visits, flows = mc.discrete_metropolis(np.log([0.3, 0.7]), steps, seed=3)
    assert abs(flows[0, 1] - flows[1, 0]) <= 1
    frac = visits[0] / steps
    assert abs(frac - 0.3) < 3 * np.sqrt(0.3 * 0.7 / steps)


def test_tuned_acceptance_and_cached_density():
    p = mc.Params(6, 1, 0.0, 0.01)
    run = mc.mh_chain(p, 2000, seed=2, chains=2, check_every=100)
    assert 0.1 < run.acceptance < 0.9
    last = run.samples[:, -1]
    fresh = [mc.log_joint_density(row, p) for row in last]
    assert np.allclose(fresh, run.log_density, rtol=1e-10)


def test_tiny_proposal_acceptance_is_high_and_frozen():
    p = mc.Params(4)
    run = mc.mh_chain(p, 400, seed=0, proposal_scale=1e-4)
    assert run.proposal_scale == 1e-4
    assert run.acceptance > 0.95


def test_stuck_chain_is_diagnosed():
    with pytest.raises(mc.MCDiagnosticError):
        mc.mh_chain(mc.Params(4), 400, seed=0, proposal_scale=1e6, window=50, burn_in=0)


def test_bad_arguments():
    with pytest.raises(ValueError):
        mc.mh_chain(mc.Params(2), 0)
    with pytest.raises(ValueError):
        mc.mh_chain(mc.Params(2), 10, proposal_scale=-1)


def test_comparison_refuses_small_runs():
    run = mc.mh_chain(mc.Params(3), 200, seed=1)
    with pytest.raises(ValueError):
        mc.density_compare(run, mc.Params(3))


def test_histogram_counts_every_eigenvalue():
    p = mc.Params(3)
    run = mc.mh_chain(p, 500, seed=1, chains=2)
    rows = list(mc.histogram_rows(run, mc.default_edges(p)))
    assert rows[0] == ["left", "right", "count"]
    assert sum(int(r[2]) for r in rows[1:]) == p.n * run.n_configs


def test_exact_density_normalizes_to_n():
    ex = mc.ExactDensity(mc.Params(5, 1, 0.3, 0.02))
    assert ex.mass(0, np.inf) == pytest.approx(5, rel=1e-10)


@pytest.mark.slow
def test_classical_laguerre_histogram():
    p = mc.Params(4, 1, 0.5, 0.0)
    run = mc.mh_chain(p, 12500, seed=11, chains=8)
    cmp = mc.density_compare(run, p)
    assert cmp.p_value > 0.001


def test_hard_edge_mass_matches_exact():
    p = mc.Params(4, 1, 0.0, 0.0)
    run = mc.mh_chain(p, 10000, seed=4, chains=4)
    est = mc.hard_edge_mass(run, 0.1)
    ref = mc.exact_hard_edge_mass(p, 0.1)
    # crude 5 sigma band with a batch inflation allowance
    assert abs(est - ref) < 5 * 3 * np.sqrt(ref * (1 - ref) / run.eigenvalues.size)
