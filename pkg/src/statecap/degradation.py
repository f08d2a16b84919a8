"""Stochastic degradation between side channels, and the estimator-based bounds.

Channel A (rows indexed by the state) is a degraded version of B when
A = B @ W for some row-stochastic W. For the erasure family this has a
closed-form test; in general it is a small LP.
"""

from dataclasses import dataclass

import numpy as np

from .channels import generalized_erasure
from .lp import linprog_standard
from .probability import conditional_entropy_and_mi, joint_from_channel

FEAS_TOL = 1e-9
INDETERMINATE_TOL = 1e-6
# Columns with less total mass than this are treated as unused.
MASS_TOL = 1e-9

LOG2 = np.log(2.0)


@dataclass
class DegradationVerdict:
    degraded: bool
    witness: np.ndarray = None
    residual: float = np.inf
    indeterminate: bool = False

    def __bool__(self):
        return self.degraded


def _as_matrix(side):
    return np.asarray(getattr(side, "matrix", side), dtype=float)


def erasure_margin(side):
    """Sum over observations of the smallest probability any state gives them."""
    return float(_as_matrix(side).min(axis=0).sum())


def erasure_degradation_witness(side, epsilon):
    """Explicit post-processing turning the erasure channel of parameter ``epsilon`` into ``side``.

    The witness has one row per erasure-channel output (states first, the
    erasure symbol last). Its erasure row is the normalized column-minimum
    vector, which is admissible exactly when the margin reaches ``epsilon``.
    """
    a = _as_matrix(side)
    ns = a.shape[0]
    mins = a.min(axis=0)
    margin = mins.sum()
    if margin < epsilon:
        return DegradationVerdict(False)
    star = mins / margin if margin > 0 else np.full(a.shape[1], 1.0 / a.shape[1])
    witness = np.empty((ns + 1, a.shape[1]))
    witness[-1] = star
    if epsilon < 1:
        rows = (a - epsilon * star[None, :]) / (1 - epsilon)
        witness[:ns] = np.clip(rows, 0.0, None)
        witness[:ns] /= witness[:ns].sum(axis=1, keepdims=True)
    else:
        witness[:ns] = star
    erasure = generalized_erasure(epsilon, ns).matrix
    residual = float(np.abs(erasure @ witness - a).max())
    return DegradationVerdict(residual <= FEAS_TOL, witness, residual, residual > FEAS_TOL)


def stochastic_degradation_lp(target, source):
    """Decide by LP whether ``target`` is a degraded version of ``source``."""
    a1 = _as_matrix(target)
    a2 = _as_matrix(source)
    if a1.shape[0] != a2.shape[0]:
        raise ValueError("target and source must share the input (state) alphabet")
    ns, n2 = a2.shape
    n1 = a1.shape[1]
    # unknown W[j, k] flattened row-major (j over source outputs)
    rows = []
    rhs = []
    for j in range(n2):
        r = np.zeros(n2 * n1)
        r[j * n1:(j + 1) * n1] = 1.0
        rows.append(r)
        rhs.append(1.0)
    for s in range(ns):
        for k in range(n1):
            r = np.zeros(n2 * n1)
            r[k::n1] = a2[s]
            rows.append(r)
            rhs.append(a1[s, k])
    res = linprog_standard(np.array(rows), np.array(rhs), feas_tol=FEAS_TOL)
    w = res.x.reshape(n2, n1)
    if res.status != "optimal":
        return DegradationVerdict(False, None, float(res.phase1_objective))
    w = np.clip(w, 0.0, None)
    w /= w.sum(axis=1, keepdims=True)
    residual = float(np.abs(a2 @ w - a1).max())
    if residual <= FEAS_TOL:
        return DegradationVerdict(True, w, residual)
    # the LP reports feasible but the witness does not reproduce the target well enough
    return DegradationVerdict(False, w, residual, indeterminate=True)


# --- estimators --------------------------------------------------------------

@dataclass
class EstimatorChannel:
    """Channel from the true state to a deterministic estimate computed from the observation."""

    matrix: np.ndarray  # [s, s_hat]
    decision: np.ndarray  # observation t -> estimate
    support: tuple  # estimates that receive positive mass


def _estimator(scores, side):
    a = _as_matrix(side)
    decision = np.argmax(scores, axis=0)  # first maximum: lowest state index
    ns = a.shape[0]
    m = np.zeros((ns, ns))
    for t, s_hat in enumerate(decision):
        m[:, s_hat] += a[:, t]
    support = tuple(int(s) for s in np.flatnonzero(m.sum(axis=0) > MASS_TOL))
    return EstimatorChannel(m, decision, support)


def ml_estimator(side):
    return _estimator(_as_matrix(side), side)


def map_estimator(p_s, side):
    return _estimator(np.asarray(p_s, dtype=float)[:, None] * _as_matrix(side), side)


def map_error_probability(p_s, side):
    est = map_estimator(p_s, side)
    return float(1.0 - np.asarray(p_s) @ np.diag(est.matrix))


def off_diagonal_mass(matrix):
    m = np.asarray(matrix, dtype=float)
    return float(m.sum() - np.trace(m))


def hbar(p_s, side):
    """H(S|T) / (2 rho log 2), which bounds the off-diagonal mass of the ML estimator channel."""
    p_s = np.asarray(p_s, dtype=float)
    h, _ = conditional_entropy_and_mi(joint_from_channel(p_s, _as_matrix(side)))
    return h / (2 * p_s.min() * LOG2)


# --- symmetric family --------------------------------------------------------

def gs_inverse(q, state_size):
    """Closed-form inverse of the generalized symmetric channel with crossover ``q``."""
    n = state_size
    if not 0 <= q < 1.0 / n:
        raise ValueError(f"the symmetric channel is singular (or invalid) at q = {q}")
    den = n * q - 1
    inv = np.full((n, n), q / den)
    np.fill_diagonal(inv, (q - 1) / den)
    return inv


def column_share_ratio(table):
    """min over used columns x and rows s of table[s, x] / sum_s' table[s', x]."""
    t = np.asarray(table, dtype=float)
    col = t.sum(axis=0)
    used = col > MASS_TOL
    if not used.any():
        return 0.0
    return float((t[:, used] / col[used]).min())


def lemma4_condition(optimal_table, q):
    """Whether the perfect-CSI optimizer p(x|s) (rows = states) survives symmetric noise ``q``."""
    return column_share_ratio(optimal_table) >= q


@dataclass
class Lemma6Result:
    threshold: float
    estimator: EstimatorChannel

    def holds(self, q):
        return q >= self.threshold


def ml_offdiag_ratio(estimator):
    """max over s != s_hat, s_hat used, of p(s_hat|s) / sum_s' p(s_hat|s')."""
    m = estimator.matrix
    col = m.sum(axis=0)
    best = 0.0
    for s_hat in estimator.support:
        for s in range(m.shape[0]):
            if s != s_hat:
                best = max(best, m[s, s_hat] / col[s_hat])
    return float(best)


def lemma6_condition(side):
    """Smallest crossover q for which the symmetric channel is certified degraded from ``side``."""
    est = ml_estimator(side)
    return Lemma6Result(ml_offdiag_ratio(est), est)


# --- singular-value route ----------------------------------------------------

@dataclass
class AppendixABound:
    tau: float
    sigma_min_lower: float
    h_threshold: float
    h_cond: float
    verdict: bool


def dominance_ratio(table):
    """min over used columns x of min_s table[s, x] / max_s table[s, x]."""
    t = np.asarray(table, dtype=float)
    used = t.sum(axis=0) > MASS_TOL
    if not used.any():
        return 0.0
    cols = t[:, used]
    return float((cols.min(axis=0) / cols.max(axis=0)).min())


def appendix_a_bound(p_s, side, optimal_table):
    """Entropy threshold certifying that ``optimal_table`` is a degraded version of ``side``."""
    p_s = np.asarray(p_s, dtype=float)
    rho = p_s.min()
    ns = p_s.size
    tau = dominance_ratio(optimal_table)
    h, _ = conditional_entropy_and_mi(joint_from_channel(p_s, _as_matrix(side)))
    sigma_lb = 1 - 3 * h / (4 * rho * LOG2)
    thr = 4 * tau * rho * LOG2 / (3 * tau + 2 * np.sqrt(2 * ns))
    return AppendixABound(tau, float(sigma_lb), float(thr), float(h), bool(h <= thr))
