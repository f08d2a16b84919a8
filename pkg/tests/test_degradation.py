import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statecap.channels import SideChannel, bec, bsc, generalized_erasure, generalized_symmetric
from statecap.degradation import (
    appendix_a_bound,
    column_share_ratio,
    erasure_degradation_witness,
    erasure_margin,
    gs_inverse,
    hbar,
    lemma4_condition,
    lemma6_condition,
    map_error_probability,
    map_estimator,
    ml_estimator,
    ml_offdiag_ratio,
    off_diagonal_mass,
    stochastic_degradation_lp,
)
from statecap.probability import conditional_entropy_and_mi, joint_from_channel

from conftest import random_stochastic, seeds

LOG2 = np.log(2)


def near_identity_side(rng, n, t, noise):
    """Side channel with t >= n outputs, the first n carrying most of the mass."""
    base = np.zeros((n, t))
    base[np.arange(n), np.arange(n)] = 1.0
    return (1 - noise) * base + noise * rng.dirichlet(np.ones(t), size=n)


# erasure margin and its witnesses

def test_margin_examples():
    assert erasure_margin(np.eye(3)) == 0.0
    assert erasure_margin(bsc(0.2)) == pytest.approx(0.4)
    assert erasure_margin(np.full((2, 3), 1 / 3)) == pytest.approx(1.0)


def test_witness_bsc_point_two():
    v = erasure_degradation_witness(bsc(0.2), 0.4)
    assert v.degraded and v.residual <= 1e-12
    assert v.witness.shape == (3, 2)


def test_witness_refuses_small_margin():
    assert not erasure_degradation_witness(bsc(0.1), 0.5).degraded


def test_witness_full_erasure_needs_identical_rows():
    # with every state erased the side channel must ignore the state entirely
    assert erasure_degradation_witness(np.full((2, 2), 0.5), 1.0).degraded
    assert not erasure_degradation_witness(bsc(0.3), 1.0).degraded


@given(seeds(), st.integers(2, 3), st.integers(2, 4), st.floats(0, 1))
def test_margin_verdict_matches_lp(rng, ns, nt, eps):
    side = random_stochastic(rng, ns, nt, sparsity=0.3)
    # push the margin toward eps half the time so both verdicts occur
    if rng.random() < 0.5:
        side = 0.5 * side + 0.5 * np.full((ns, nt), 1 / nt)
    margin_says = erasure_margin(side) >= eps
    lp = stochastic_degradation_lp(side, generalized_erasure(eps, ns))
    if abs(erasure_margin(side) - eps) > 1e-7:
        assert lp.degraded == margin_says
    w = erasure_degradation_witness(side, eps)
    assert w.degraded == margin_says
    for v in (lp, w):
        if v.degraded:
            composed = generalized_erasure(eps, ns).matrix @ v.witness
            assert np.abs(composed - side).max() <= 1e-8
            np.testing.assert_allclose(v.witness.sum(axis=1), 1.0, atol=1e-12)
            assert v.witness.min() >= 0


# LP verdicts

def test_lp_self_is_degraded():
    side = bsc(0.2)
    v = stochastic_degradation_lp(side, side)
    assert v.degraded
    np.testing.assert_allclose(side.matrix @ v.witness, side.matrix, atol=1e-12)


def test_lp_erase_more():
    v = stochastic_degradation_lp(bec(0.7), bec(0.3))
    assert v.degraded and v.residual <= 1e-9


def test_lp_cannot_refine():
    assert not stochastic_degradation_lp(np.eye(2), bsc(0.1)).degraded


def test_lp_state_mismatch():
    with pytest.raises(ValueError):
        stochastic_degradation_lp(np.eye(2), np.eye(3))


@given(seeds())
def test_degradation_transitive(rng):
    c = random_stochastic(rng, 3, 4)
    b = c @ random_stochastic(rng, 4, 3)
    a = b @ random_stochastic(rng, 3, 3)
    ab = stochastic_degradation_lp(a, b)
    bc = stochastic_degradation_lp(b, c)
    assert ab.degraded and bc.degraded
    np.testing.assert_allclose(c @ (bc.witness @ ab.witness), a, atol=1e-8)
    assert stochastic_degradation_lp(a, c).degraded


# estimators

def test_ml_of_bsc():
    est = ml_estimator(bsc(0.1))
    np.testing.assert_allclose(est.matrix, bsc(0.1).matrix)


def test_ml_tie_goes_to_lowest_state():
    est = ml_estimator(np.full((2, 3), 1 / 3))
    np.testing.assert_array_equal(est.decision, [0, 0, 0])
    assert est.support == (0,)
    np.testing.assert_allclose(est.matrix, [[1, 0], [1, 0]])


def test_ml_of_bec():
    est = ml_estimator(bec(0.3))
    assert est.decision[-1] == 0
    assert est.matrix[1, 0] == pytest.approx(0.3)


def test_map_weights_prior():
    side = np.array([[0.6, 0.4], [0.4, 0.6]])
    assert tuple(map_estimator([0.9, 0.1], side).decision) == (0, 0)
    assert tuple(ml_estimator(side).decision) == (0, 1)
    assert map_error_probability([0.9, 0.1], side) == pytest.approx(0.1)


@given(seeds(), st.integers(2, 4), st.integers(2, 5))
def test_hv_bound(rng, ns, nt):
    p_s = rng.dirichlet(np.ones(ns))
    side = random_stochastic(rng, ns, nt, sparsity=0.3)
    h, _ = conditional_entropy_and_mi(joint_from_channel(p_s, side))
    assert map_error_probability(p_s, side) <= h / (2 * LOG2) + 1e-12


@given(seeds(), st.integers(2, 4), st.integers(2, 5))
def test_offdiagonal_mass_below_hbar(rng, ns, nt):
    p_s = rng.dirichlet(np.ones(ns)) * 0.7 + 0.3 / ns
    side = random_stochastic(rng, ns, nt, sparsity=0.3)
    assert off_diagonal_mass(ml_estimator(side).matrix) <= hbar(p_s, side) + 1e-12


@given(seeds(), st.integers(2, 4), st.floats(0.0, 0.3))
def test_ratio_below_hbar_chain(rng, ns, noise):
    p_s = rng.dirichlet(np.ones(ns)) * 0.5 + 0.5 / ns
    side = near_identity_side(rng, ns, ns + 1, noise)
    h = hbar(p_s, side)
    if h <= 1:
        assert ml_offdiag_ratio(ml_estimator(side)) <= h / (h + 1) + 1e-12


# symmetric family

def test_gs_inverse_examples():
    np.testing.assert_array_equal(gs_inverse(0, 3), np.eye(3))
    np.testing.assert_allclose(gs_inverse(0.1, 2), [[0.9 / 0.8, -0.1 / 0.8], [-0.1 / 0.8, 0.9 / 0.8]])
    inv = gs_inverse(0.2, 3)
    assert inv[0, 0] == pytest.approx(2.0) and inv[0, 1] == pytest.approx(-0.5)
    with pytest.raises(ValueError, match="singular"):
        gs_inverse(0.5, 2)


@given(st.integers(2, 5), st.floats(0, 0.999))
def test_gs_inverse_is_inverse(n, frac):
    q = frac / n
    np.testing.assert_allclose(gs_inverse(q, n) @ generalized_symmetric(q, n).matrix, np.eye(n),
                               atol=1e-12 / (1 - frac))


def test_lemma4():
    indep = np.full((3, 2), 0.5)
    assert column_share_ratio(indep) == pytest.approx(1 / 3)
    assert lemma4_condition(indep, 1 / 3)
    table = np.array([[0.4, 0.6], [0.6, 0.4]])
    assert column_share_ratio(table) == pytest.approx(0.4)
    assert lemma4_condition(table, 0.4) and not lemma4_condition(table, 0.41)
    zero = np.array([[0.0, 1.0], [0.5, 0.5]])
    assert column_share_ratio(zero) == 0.0
    assert lemma4_condition(zero, 0.0) and not lemma4_condition(zero, 1e-6)


def test_lemma6():
    assert lemma6_condition(np.eye(2)).threshold == 0.0
    r = lemma6_condition(bsc(0.1))
    assert r.threshold == pytest.approx(0.1)
    assert r.holds(0.1) and not r.holds(0.09)
    r = lemma6_condition(np.full((2, 2), 0.5))
    assert r.estimator.support == (0,) and r.threshold == pytest.approx(0.5)


# singular-value route

def test_appendix_a_examples():
    p_s = np.array([0.5, 0.5])
    assert appendix_a_bound(p_s, np.eye(2), np.array([[0.3, 0.7], [0.6, 0.4]])).verdict
    b = appendix_a_bound(p_s, bsc(0.01), np.full((2, 2), 0.5))
    assert b.tau == 1.0
    assert b.h_threshold == pytest.approx(4 * 0.5 * LOG2 / (3 + 2 * np.sqrt(4)))


@given(seeds(), st.integers(2, 3))
def test_tau_bound_for_binary_tables(rng, ns):
    table = rng.uniform(np.exp(-1) + 1e-9, 1 - np.exp(-1), size=ns)
    table = np.column_stack([table, 1 - table])
    b = appendix_a_bound(np.full(ns, 1 / ns), bsc(0.05) if ns == 2 else np.eye(ns), table)
    rho = 1 / ns
    assert b.tau >= 1 / (np.e - 1) - 1e-12
    assert b.h_threshold >= 4 * rho * LOG2 / (3 + 2 * (np.e - 1) * np.sqrt(2 * ns)) - 1e-12


@given(seeds(), st.integers(2, 4), st.floats(0, 0.4))
def test_sigma_lower_bound_is_sound(rng, ns, noise):
    p_s = rng.dirichlet(np.ones(ns)) * 0.5 + 0.5 / ns
    side = near_identity_side(rng, ns, ns + 1, noise)
    b = appendix_a_bound(p_s, side, np.full((ns, 2), 0.5))
    sigma = np.linalg.svd(ml_estimator(side).matrix, compute_uv=False).min()
    assert b.sigma_min_lower <= sigma + 1e-12
