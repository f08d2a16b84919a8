import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statecap.channels import (
    SideChannel,
    example_sz_channel,
    generalized_erasure,
    generalized_symmetric,
    identity_side,
)
from statecap.strategies import (
    EnumerationCapExceeded,
    enumerate_strategies,
    induced_channel,
    induced_output_channel,
    perturbation_tables,
)

from conftest import random_model, random_side, seeds

TABLE_1 = [  # (t=0, t=1, t=*) for u = 0..7
    (0, 0, 0), (1, 1, 1), (1, 1, 0), (0, 0, 1),
    (0, 1, 0), (0, 1, 1), (1, 0, 0), (1, 0, 1),
]
TABLE_2 = [(0, 0), (1, 1), (0, 1), (1, 0)]


def test_binary_plain_ordering():
    assert [tuple(r) for r in enumerate_strategies(2, 2).table] == TABLE_2


def test_binary_erasure_ordering():
    table = enumerate_strategies(2, 3, erasure=True).table
    assert [tuple(r) for r in table] == TABLE_1
    assert tuple(table[4]) == (0, 1, 0)


def test_single_input():
    t = enumerate_strategies(1, 3)
    assert t.size == 1 and tuple(t.table[0]) == (0, 0, 0)


@given(st.integers(1, 4), st.integers(1, 4), st.booleans())
def test_enumeration_is_complete(nx, nt, erasure):
    t = enumerate_strategies(nx, nt, erasure=erasure)
    rows = {tuple(r) for r in t.table}
    assert t.size == nx ** nt == len(rows)
    # constants come first, u -> u
    for c in range(nx):
        assert tuple(t.table[c]) == (c,) * nt


def test_cap():
    with pytest.raises(EnumerationCapExceeded, match="4096"):
        enumerate_strategies(2, 13)
    assert enumerate_strategies(2, 13, cap=10_000).size == 8192


def test_format_marks_erasure():
    text = enumerate_strategies(2, 3, erasure=True).format()
    assert "t=*" in text and text.count("\n") == 8


# induced channel

@given(seeds(), st.integers(2, 3), st.integers(2, 3), st.integers(2, 3), st.integers(2, 3))
def test_induced_rows_and_state_marginal(rng, nx, ns, ny, nt):
    model = random_model(rng, nx, ns, ny)
    side = random_side(rng, ns, nt)
    w = induced_channel(model, side)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
    state_marg = w.reshape(w.shape[0], ny, ns).sum(axis=1)
    np.testing.assert_allclose(state_marg, np.broadcast_to(model.state_dist, state_marg.shape),
                               atol=1e-12)


def test_noiseless_side_applies_strategy_to_state():
    model = example_sz_channel(0.3)
    strat = enumerate_strategies(2, 2)
    w = induced_channel(model, identity_side(2), strat).reshape(4, 2, 2)
    for u, psi in enumerate(strat.table):
        for s in range(2):
            np.testing.assert_allclose(w[u, :, s], 0.5 * model.transition[psi[s], s])


def test_uninformative_side_gives_mixtures_of_constants():
    model = example_sz_channel(0.5)
    side = generalized_erasure(1.0, 2)
    w = induced_channel(model, side)
    consts = w[:2]
    for u, psi in enumerate(enumerate_strategies(2, 3, erasure=True).table):
        # only the erasure column is ever observed
        np.testing.assert_allclose(w[u], consts[psi[-1]], atol=1e-15)


@given(seeds(), st.floats(0, 1), st.integers(2, 3))
def test_erasure_induced_channel_is_affine(rng, eps, ns):
    model = random_model(rng, 2, ns, 2)
    strat = enumerate_strategies(2, ns + 1, erasure=True)
    tabs = perturbation_tables(model, strat, "erasure")
    w = induced_channel(model, generalized_erasure(eps, ns), strat).reshape(strat.size, 2, ns)
    expected = model.state_dist[None, None, :] * (tabs.base + eps * tabs.delta)
    np.testing.assert_allclose(w, expected, atol=1e-12)


@given(seeds(), st.floats(0, 1))
def test_symmetric_induced_channel_is_affine(rng, frac):
    ns = 3
    q = frac / ns
    model = random_model(rng, 2, ns, 2)
    strat = enumerate_strategies(2, ns)
    tabs = perturbation_tables(model, strat, "symmetric")
    w = induced_channel(model, generalized_symmetric(q, ns), strat).reshape(strat.size, 2, ns)
    expected = model.state_dist[None, None, :] * (tabs.base + q * tabs.omega)
    np.testing.assert_allclose(w, expected, atol=1e-12)


def test_output_channel_marginalizes_state():
    model = example_sz_channel(0.5)
    side = generalized_erasure(0.4, 2)
    full = induced_channel(model, side).reshape(8, 2, 2)
    np.testing.assert_allclose(induced_output_channel(model, side), full.sum(axis=2))


def test_size_mismatch():
    model = example_sz_channel(0.5)
    with pytest.raises(ValueError, match="states"):
        induced_channel(model, SideChannel(np.eye(3)))


# perturbation tables

def test_constants_are_unperturbed():
    model = random_model(np.random.default_rng(1), 3, 2, 3)
    strat = enumerate_strategies(3, 3, erasure=True)
    tabs = perturbation_tables(model, strat, "erasure")
    assert set(range(3)) <= set(tabs.g_delta)
    tabs = perturbation_tables(model, enumerate_strategies(3, 2), "symmetric")
    assert set(range(3)) <= set(tabs.g_omega)


def test_example_unperturbed_sets():
    model = example_sz_channel(0.5)
    tabs = perturbation_tables(model, enumerate_strategies(2, 3, erasure=True), "erasure")
    # psi(u, *) agrees with psi(u, s) in every state only for the constants
    assert tabs.g_delta == (0, 1)


def test_unknown_family():
    model = example_sz_channel(0.5)
    with pytest.raises(ValueError, match="family"):
        perturbation_tables(model, enumerate_strategies(2, 2), "gaussian")
