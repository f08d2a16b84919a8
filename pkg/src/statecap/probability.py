"""Distributions, stochastic matrices and the basic information functionals.

Everything is in nats. Arrays are plain numpy float64; the helpers here
validate and normalize them so the rest of the package can assume
well-formed inputs.
"""

import numpy as np

# Deviation from unit row sum tolerated (and silently fixed) on construction.
NORMALIZE_TOL = 1e-9
# Below this deviation a row is kept bit-for-bit as given.
EXACT_TOL = 1e-12


class DivergenceInfinite(ValueError):
    """Raised when ``p`` is not absolutely continuous with respect to ``q``."""


def prob_vector(p, tol=NORMALIZE_TOL):
    """Return ``p`` as a normalized float array, checking it is a distribution."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"expected a non-empty 1-d probability vector, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probability vector has negative or non-finite entries")
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"probability vector sums to {total!r}, not 1")
    if abs(total - 1.0) > EXACT_TOL:
        p = p / total
    return p


def stochastic_matrix(w, tol=NORMALIZE_TOL):
    """Return ``w`` as a row-stochastic float matrix (rows renormalized)."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or 0 in w.shape:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {w.shape}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("stochastic matrix has negative or non-finite entries")
    sums = w.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"row {i} sums to {sums[i]!r}, not 1")
    fix = np.abs(sums - 1.0) > EXACT_TOL
    if fix.any():
        w = w.copy()
        w[fix] /= sums[fix, None]
    return w


def xlogy(x, y):
    """Elementwise ``x * log(y)`` with the convention ``0 * log(anything) = 0``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    mask = np.broadcast_to(x != 0, out.shape)
    xb = np.broadcast_to(x, out.shape)
    yb = np.broadcast_to(y, out.shape)
    with np.errstate(divide="ignore"):
        out[mask] = xb[mask] * np.log(yb[mask])
    return out


def plogp_ratio(p, q):
    """Elementwise ``p * log(p / q)``; zero wherever ``p == 0``, ``+inf`` where only ``q`` vanishes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p, q = np.broadcast_arrays(p, q)
    out = np.zeros(p.shape)
    pos = p > 0
    with np.errstate(divide="ignore"):
        out[pos] = p[pos] * (np.log(p[pos]) - np.log(q[pos]))
    return out


def entropy(p):
    p = np.asarray(p, dtype=float)
    return float(max(-xlogy(p, p).sum(), 0.0))


def kl_divergence(p, q):
    """D(p || q) in nats.

    Raises DivergenceInfinite if ``p`` puts mass where ``q`` has none.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    if np.any((p > 0) & (q <= 0)):
        raise DivergenceInfinite("support of p is not contained in support of q")
    return float(max(plogp_ratio(p, q).sum(), 0.0))


def variational_distance(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return float(0.5 * np.abs(p - q).sum())


def row_divergences(channel, output):
    """D(W(.|x) || output) for every row ``x`` of ``channel``.

    Rows that charge a zero of ``output`` get ``inf``.
    """
    terms = plogp_ratio(channel, output[None, :])
    return terms.sum(axis=1)


def mutual_information(p_in, channel):
    """I(X;Y) for input law ``p_in`` through the row-stochastic ``channel``."""
    p_in = np.asarray(p_in, dtype=float)
    channel = np.asarray(channel, dtype=float)
    if channel.ndim != 2 or p_in.shape != (channel.shape[0],):
        raise ValueError(
            f"dimension mismatch: input of size {p_in.shape} for channel {channel.shape}"
        )
    out = p_in @ channel
    active = p_in > 0
    d = row_divergences(channel[active], out)
    return float(max(p_in[active] @ d, 0.0))


def conditional_entropy_and_mi(joint):
    """Return ``(H(S|T), I(S;T))`` for a joint table indexed ``[s, t]``."""
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 2:
        raise ValueError("joint table must be 2-d, indexed [s, t]")
    joint = joint / joint.sum()
    p_s = joint.sum(axis=1)
    p_t = joint.sum(axis=0)
    h_s = entropy(p_s)
    h_st = entropy(joint.ravel())
    h_s_given_t = max(h_st - entropy(p_t), 0.0)
    return h_s_given_t, h_s - h_s_given_t


def joint_from_channel(p_s, side):
    """Joint table p(s, t) = p_S(s) p(t|s)."""
    return np.asarray(p_s, dtype=float)[:, None] * np.asarray(side, dtype=float)


def compose(first, second):
    """Cascade of two channels: apply ``first`` then ``second``."""
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    if first.shape[1] != second.shape[0]:
        raise ValueError(f"cannot compose {first.shape} with {second.shape}")
    return first @ second
