import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from statecap import SideChannel, StateChannelModel

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_stochastic(rng, rows, cols, sparsity=0.0):
    """Dirichlet rows; with ``sparsity`` > 0 some entries are zeroed (one kept per row)."""
    m = rng.dirichlet(np.ones(cols), size=rows)
    if sparsity:
        mask = rng.random((rows, cols)) < sparsity
        mask[np.arange(rows), rng.integers(cols, size=rows)] = False
        m = np.where(mask, 0.0, m)
        m /= m.sum(axis=1, keepdims=True)
    return m


def random_model(rng, x_size=2, s_size=2, y_size=2, sparsity=0.0):
    w = random_stochastic(rng, x_size * s_size, y_size, sparsity).reshape(x_size, s_size, y_size)
    p_s = rng.dirichlet(np.ones(s_size)) * 0.8 + 0.2 / s_size
    return StateChannelModel(w, p_s / p_s.sum())


def random_side(rng, s_size, t_size, sparsity=0.0):
    return SideChannel(random_stochastic(rng, s_size, t_size, sparsity))


@st.composite
def prob_vectors(draw, size=None, min_size=2, max_size=5):
    n = size or draw(st.integers(min_size, max_size))
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
    w = np.array(w) + 1e-3
    return w / w.sum()


@st.composite
def seeds(draw):
    return np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
