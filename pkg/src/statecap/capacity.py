"""Capacity solvers for channels with state.

All of them reduce to Blahut-Arimoto on a suitable DMC, except the probing
capacity (a concave program over p(x|t), solved by a multiplicative ascent
certified with the Frank-Wolfe gap) and the Gelfand-Pinsker capacity, which
is nonconcave and only bracketed.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .probability import mutual_information, plogp_ratio, row_divergences
from .strategies import (
    DEFAULT_CAP,
    induced_channel,
    induced_output_channel,
    strategies_for,
)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000
# Largest exponent tried in the over-relaxed multiplicative updates.
MAX_STEP = 64.0
# Iteration at which a still-open gap is handed to SLSQP, and its size limit.
POLISH_AFTER = 500
POLISH_MAX_SIZE = 512
POLISH_MAX_ITER = 500


@dataclass
class CapacitySolution:
    value: float
    argmax: np.ndarray
    per_letter_divergence: np.ndarray
    iterations: int
    converged: bool
    gap_bound: float
    history: list = field(default_factory=list, repr=False)

    @property
    def upper(self):
        return self.value + self.gap_bound


def _divergences(channel, p):
    out = p @ channel
    with np.errstate(invalid="ignore"):
        return row_divergences(channel, out)


def _slsqp_polish(fun_grad, x0, blocks, max_iter=POLISH_MAX_ITER):
    """Maximize a smooth concave function over a product of simplices with SLSQP.

    ``blocks`` lists the index arrays of the simplices. Returns the
    (clipped, renormalized) maximizer or None if SLSQP fails outright.
    """
    cons = []
    for idx in blocks:
        row = np.zeros(x0.size)
        row[idx] = 1.0
        cons.append({"type": "eq", "fun": lambda x, r=row: r @ x - 1.0, "jac": lambda x, r=row: r})

    def neg(x):
        v, g = fun_grad(np.clip(x, 0.0, None))
        return -v, -g

    with np.errstate(all="ignore"):
        res = minimize(neg, x0, jac=True, method="SLSQP", bounds=[(0.0, 1.0)] * x0.size,
                       constraints=cons, options={"ftol": 1e-16, "maxiter": max_iter})
    x = np.clip(res.x, 0.0, None)
    if not np.all(np.isfinite(x)):
        return None
    for idx in blocks:
        total = x[idx].sum()
        if total <= 0:
            return None
        x[idx] /= total
    return x


def _finite(d):
    # unbounded divergences only arise for unused letters; a large finite
    # slope keeps the local model usable
    return np.where(np.isfinite(d), d, 1e3)


def ba_capacity(channel, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, p0=None, record=False):
    """Blahut-Arimoto for the DMC ``channel`` (rows are input letters).

    Stops once max_x D(W_x || pW) - I(p) <= tol; that difference bounds the
    distance from I(p) to capacity, and is reported as ``gap_bound``.

    The multiplicative step is over-relaxed (exponent above one) whenever that
    does not lower I(p), so the iterates stay monotone. On degenerate
    channels, where the sandwich closes only sublinearly, the iterate is
    handed to SLSQP after ``POLISH_AFTER`` steps and its result is accepted
    only if it carries a certified gap within ``tol``.
    """
    w = np.asarray(channel, dtype=float)
    if w.ndim != 2:
        raise ValueError("channel must be a 2-d row-stochastic matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = w.shape[0]
    p = np.full(n, 1.0 / n) if p0 is None else np.asarray(p0, dtype=float).copy()
    history = []
    converged = False
    it = 0
    d = _divergences(w, p)
    lower = float(p @ d)
    upper = float(d.max())
    step = 1.0
    for it in range(1, max_iter + 1):
        if record:
            history.append(lower)
        if upper - lower <= tol:
            converged = True
            break
        if it % POLISH_AFTER == 0 and n <= POLISH_MAX_SIZE:
            def fun_grad(x):
                dx = _divergences(w, x)
                return float(x @ _finite(dx)), _finite(dx) - 1.0

            x = _slsqp_polish(fun_grad, p, [np.arange(n)])
            if x is not None:
                dx = _divergences(w, x)
                lx = float(x @ dx)
                if lx >= lower and dx.max() - lx <= tol:
                    p, d, lower, upper = x, dx, lx, float(dx.max())
                    converged = True
                    if record:
                        history.append(lower)
                    break
        while True:
            cand = p * np.exp(step * (d - upper))
            cand /= cand.sum()
            d_c = _divergences(w, cand)
            l_c = float(cand @ d_c)
            if l_c >= lower or step == 1.0:
                break
            step = max(1.0, step / 4)
        p, d, lower, upper = cand, d_c, l_c, float(d_c.max())
        step = min(step * 2, MAX_STEP)
    lower = max(lower, 0.0)
    return CapacitySolution(
        value=lower,
        argmax=p,
        per_letter_divergence=d,
        iterations=it,
        converged=converged,
        gap_bound=max(upper - lower, 0.0),
        history=history,
    )


def binary_input_optimizer(channel, xtol=1e-15):
    """Exact capacity-achieving p(x=0) of a two-row channel, or None if every input law is optimal.

    For two distinct rows the mutual information is strictly concave in p(x=0)
    and its derivative D(W_0 || q) - D(W_1 || q) is decreasing, so the optimum
    is its unique root.
    """
    w = np.asarray(channel, dtype=float)
    if w.shape[0] != 2:
        raise ValueError("binary_input_optimizer needs exactly two input letters")
    if np.array_equal(w[0], w[1]):
        return None

    def slope(a):
        d = _divergences(w, np.array([a, 1.0 - a]))
        return d[0] - d[1]

    lo, hi = 0.0, 1.0
    if slope(lo) <= 0:
        return lo
    if slope(hi) >= 0:
        return hi
    return float(brentq(slope, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500))


def capacity_no_csi(model, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Capacity with the state known only at the decoder."""
    return ba_capacity(model.joint_output_channel(), tol, max_iter)


def capacity_full_csi(model, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Capacity with the state known at both ends.

    The mutual information splits into a p_S-weighted sum of per-state terms,
    each maximized independently; ``argmax`` is the table p(x|s) indexed [s, x].
    """
    table = np.zeros((model.s_size, model.x_size))
    value = gap = 0.0
    iters = 0
    converged = True
    divs = []
    for s in range(model.s_size):
        sol = ba_capacity(model.state_channel(s), tol, max_iter)
        table[s] = sol.argmax
        value += model.state_dist[s] * sol.value
        gap += model.state_dist[s] * sol.gap_bound
        iters = max(iters, sol.iterations)
        converged &= sol.converged
        divs.append(sol.per_letter_divergence)
    return CapacitySolution(value, table, np.array(divs), iters, converged, gap)


def capacity_causal(model, side, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, cap=DEFAULT_CAP):
    """Capacity with causal noisy state at the encoder and the state at the decoder."""
    strategies = strategies_for(model, side, cap=cap)
    return ba_capacity(induced_channel(model, side, strategies), tol, max_iter)


def capacity_no_decoder_csi(model, side, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                            cap=DEFAULT_CAP):
    """Return (no state anywhere, causal noisy state at the encoder only)."""
    lower = ba_capacity(model.averaged_channel(), tol, max_iter)
    strategies = strategies_for(model, side, cap=cap)
    upper = ba_capacity(induced_output_channel(model, side, strategies), tol, max_iter)
    return lower, upper


# --- probing capacity --------------------------------------------------------

def _probing_pieces(model, side, P):
    """Per-state input laws, per-(s, x) divergences and the objective."""
    w = model.transition  # [x, s, y]
    p_xs = side.matrix @ P  # [s, x]
    out = np.einsum("sx,xsy->sy", p_xs, w)
    d = plogp_ratio(w, out[None, :, :]).sum(axis=2).T  # [s, x]
    vals = np.where(p_xs > 0, p_xs * d, 0.0).sum(axis=1)
    return p_xs, d, float(model.state_dist @ vals)


def probing_objective(model, side, P):
    """I(X;Y|S) when the encoder draws X from p(x|t) = ``P[t, x]``."""
    return _probing_pieces(model, side, np.asarray(P, dtype=float))[2]


def _probing_value_grad(model, side, joint_st, P):
    _, d, value = _probing_pieces(model, side, P)
    # d/dP[t, x] of sum_s p_S(s) sum_x p(x|s) D_s(x) is sum_s p(s, t) (D_s(x) - 1)
    return value, (joint_st.T @ (_finite(d) - 1.0)).ravel()


def capacity_probing(model, side, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Generalized probing capacity: max over p(x|t) of I(X;Y|S).

    The ascent step is the multiplicative update
    P(x|t) <- P(x|t) exp(sum_s pi(s|t) D_s(x)), which never decreases the
    objective. Convergence is certified by the Frank-Wolfe gap of the concave
    objective, which upper-bounds the distance to the optimum.
    """
    nt, nx = side.t_size, model.x_size
    joint_st = model.state_dist[:, None] * side.matrix  # [s, t]
    p_t = joint_st.sum(axis=0)
    live = p_t > 0
    post = np.zeros_like(joint_st)
    post[:, live] = joint_st[:, live] / p_t[live]  # pi(s|t)
    P = np.full((nt, nx), 1.0 / nx)
    converged = False
    it = 0
    value = gap = np.inf
    step = 1.0
    _, d, value = _probing_pieces(model, side, P)
    for it in range(1, max_iter + 1):
        g = post.T @ np.where(np.isfinite(d), d, 0.0)  # [t, x]
        gmax = g.max(axis=1)
        gap = float(p_t @ (gmax - (P * g).sum(axis=1)))
        if gap <= tol:
            converged = True
            break
        if it % POLISH_AFTER == 0 and nt * nx <= POLISH_MAX_SIZE:
            x = _slsqp_polish(lambda v: _probing_value_grad(model, side, joint_st, v.reshape(nt, nx)),
                              P.ravel().copy(), [np.arange(t * nx, (t + 1) * nx) for t in range(nt)])
            if x is not None:
                Px = x.reshape(nt, nx)
                _, d_x, v_x = _probing_pieces(model, side, Px)
                g_x = post.T @ np.where(np.isfinite(d_x), d_x, 0.0)
                gap_x = float(p_t @ (g_x.max(axis=1) - (Px * g_x).sum(axis=1)))
                if v_x >= value and gap_x <= tol:
                    P, g, value, gap = Px, g_x, v_x, gap_x
                    converged = True
                    break
        # longer steps are kept only while they do not lose ground; the unit
        # step is the one with the monotonicity guarantee
        while True:
            cand = P * np.exp(step * (g - gmax[:, None]))
            cand /= cand.sum(axis=1, keepdims=True)
            _, d_c, v_c = _probing_pieces(model, side, cand)
            if v_c >= value or step == 1.0:
                break
            step = max(1.0, step / 4)
        P, d, value = cand, d_c, v_c
        step = min(step * 2, MAX_STEP)
    return CapacitySolution(
        value=max(value, 0.0),
        argmax=P,
        per_letter_divergence=g,
        iterations=it,
        converged=converged,
        gap_bound=max(gap, 0.0),
    )


# --- Gelfand-Pinsker ---------------------------------------------------------

@dataclass
class GpSolution:
    lower_bound: float
    upper_bound: float
    restarts: int
    best_argument: np.ndarray
    causal_value: float = float("nan")


class _GpProblem:
    def __init__(self, model, side, strategies):
        psi = strategies.table
        s_idx = np.arange(model.s_size)
        chosen = model.transition[psi[:, :, None], s_idx[None, None, :], :]  # [u, t, s, y]
        weights = model.state_dist[:, None] * side.matrix  # [s, t]
        self.kernel = (chosen * weights.T[None, :, :, None]).reshape(psi.shape[0], side.t_size, -1)
        self.p_t = weights.sum(axis=0)
        self.nu = psi.shape[0]
        self.nt = side.t_size

    def value_and_grad(self, P):
        """Objective I(U;Y,S) - I(U;T) for P[t, u] = p(u|t), and its gradient in P."""
        K, p_t = self.kernel, self.p_t
        joint = np.einsum("tu,utk->uk", P, K)  # p(u, (y, s))
        p_u = p_t @ P
        p_out = joint.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_ratio = np.where(joint > 0, np.log(joint) - np.log(p_u)[:, None] - np.log(p_out)[None, :], 0.0)
            i_uys = float((joint * log_ratio).sum())
            pt_u = p_t[:, None] * P
            log_pu = np.where(pt_u > 0, np.log(P) - np.log(p_u)[None, :], 0.0)
            i_ut = float((pt_u * log_pu).sum())
            lr = np.where(joint > 0, np.log(joint) - np.log(p_out)[None, :], 0.0)
            grad = np.einsum("utk,uk->tu", K, lr) - p_t[:, None] * np.where(P > 0, np.log(P), 0.0)
        return i_uys - i_ut, grad


def _softmax_rows(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _ascend(problem, P0, max_iter):
    shape = P0.shape
    z0 = np.log(np.clip(P0, 1e-30, None))

    def fun(zflat):
        P = _softmax_rows(zflat.reshape(shape))
        val, g = problem.value_and_grad(P)
        gz = P * (g - (P * g).sum(axis=1, keepdims=True))
        return -val, -gz.ravel()

    res = minimize(fun, z0.ravel(), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "gtol": 1e-12, "ftol": 1e-15})
    P = _softmax_rows(res.x.reshape(shape))
    return problem.value_and_grad(P)[0], P


def capacity_gp(model, side, restarts=32, seed=0, tol=DEFAULT_TOL, max_iter=2000,
                cap=DEFAULT_CAP, causal=None, probing=None):
    """Best-effort Gelfand-Pinsker capacity with noncausal noisy state.

    The objective is not concave, so this runs seeded multi-start ascent and
    reports the best value found as ``lower_bound``; ``upper_bound`` is the
    probing capacity, which always dominates. Starting points: the causal
    optimizer (U independent of the observation), the perfect-state optimizer
    placed on the constant strategies, the deterministic corners, then random
    interior points.
    """
    strategies = strategies_for(model, side, cap=cap)
    problem = _GpProblem(model, side, strategies)
    nt, nu = problem.nt, problem.nu
    rng = np.random.default_rng(seed)

    if causal is None:
        causal = capacity_causal(model, side, tol=tol, cap=cap)
    if probing is None:
        probing = capacity_probing(model, side, tol=tol)

    seeds = [np.tile(causal.argmax, (nt, 1))]
    full = capacity_full_csi(model, tol=tol)
    nx = model.x_size
    structured = np.zeros((nt, nu))
    no_csi = capacity_no_csi(model, tol=tol).argmax
    for t in range(nt):
        # observation symbols beyond the state alphabet carry no state estimate
        structured[t, :nx] = full.argmax[t] if t < model.s_size else no_csi
    seeds.append(structured)
    for u in range(min(nu, max(restarts - 2, 0))):
        corner = np.full((nt, nu), 1e-6)
        corner[:, u] = 1.0
        seeds.append(corner / corner.sum(axis=1, keepdims=True))
    while len(seeds) < restarts:
        seeds.append(rng.dirichlet(np.ones(nu), size=nt))
    seeds = seeds[:max(restarts, 2)]

    best_val, best_P = -np.inf, None
    for P0 in seeds:
        v0 = problem.value_and_grad(P0)[0]
        if v0 > best_val:
            best_val, best_P = v0, P0
        v, P = _ascend(problem, P0, max_iter)
        if v > best_val:
            best_val, best_P = v, P
    upper = min(probing.upper, np.log(nu))
    return GpSolution(
        lower_bound=float(best_val),
        upper_bound=float(upper),
        restarts=len(seeds),
        best_argument=best_P,
        causal_value=causal.value,
    )


def gp_objective(model, side, P):
    strategies = strategies_for(model, side)
    return _GpProblem(model, side, strategies).value_and_grad(np.asarray(P, dtype=float))[0]


__all__ = [
    "CapacitySolution", "GpSolution", "ba_capacity", "capacity_no_csi", "capacity_full_csi",
    "capacity_causal", "capacity_probing", "capacity_no_decoder_csi", "capacity_gp",
    "probing_objective", "gp_objective", "mutual_information",
]
