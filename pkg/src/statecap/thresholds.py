"""Noise thresholds at which encoder side information stops helping (or stops hurting).

The causal capacity with an erasure (or symmetric) side channel collapses to
the no-CSI capacity exactly when the embedded no-CSI optimizer keeps every
per-strategy divergence at or below the no-CSI capacity. Each divergence is
a convex function of the noise level, so each strategy contributes one
breakpoint and the threshold is the largest of them.
"""

from dataclasses import dataclass, field

import numpy as np

from .capacity import ba_capacity, binary_input_optimizer
from .degradation import (
    LOG2,
    MASS_TOL,
    column_share_ratio,
    erasure_margin,
    ml_estimator,
    ml_offdiag_ratio,
)
from .probability import conditional_entropy_and_mi, joint_from_channel
from .strategies import enumerate_strategies, perturbation_tables

ROOT_TOL = 1e-10
# Slack when comparing a divergence to the no-CSI capacity.
VALUE_SLACK = 1e-11
# Strategy membership in U_+ and strictness margin of the derivative test.
UPLUS_TOL = 1e-8
STRICT_MARGIN = 1e-8
# Derivative at the far endpoint at or below this counts as non-increasing.
FLAT_SLOPE = 1e-10

REFERENCE_TOL = 1e-14
REFERENCE_MAX_ITER = 200_000


class RootBracketError(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


# --- the no-CSI reference point ----------------------------------------------

@dataclass
class NoCsiReference:
    """Optimizer of the no-CSI capacity and the output law it induces."""

    p_hat: np.ndarray
    output: np.ndarray  # [y, s] = sum_x p_hat(x) p(y|x,s), not weighted by p_S
    capacity: float


def _optimal_input(channel):
    if channel.shape[0] == 2:
        a = binary_input_optimizer(channel)
        if a is not None:
            return np.array([a, 1.0 - a])
    return ba_capacity(channel, REFERENCE_TOL, REFERENCE_MAX_ITER).argmax


def no_csi_reference(model):
    p_hat = _optimal_input(model.joint_output_channel())
    output = np.einsum("x,xsy->ys", p_hat, model.transition)
    # value of the divergence at the constant strategies; equals the capacity on the support
    joint = model.joint_output_channel()
    ref = joint.T @ p_hat
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(joint > 0, joint * (np.log(joint) - np.log(ref)[None, :]), 0.0)
    capacity = float(p_hat @ terms.sum(axis=1))
    return NoCsiReference(p_hat, output, capacity)


# --- perturbed divergences ---------------------------------------------------

class PerturbedDivergence:
    """D(p(y,s|u) || p(y,s)) along base + t * direction, for every strategy at once.

    Evaluated with the embedded no-CSI optimizer as the input law, so the
    reference output law does not move with ``t``.
    """

    def __init__(self, base, direction, p_s, output, upper):
        self.base = base  # [u, y, s]
        self.direction = direction
        self.p_s = p_s
        self.output = output
        self.upper = upper
        self.log_out = np.where(output > 0, np.log(np.where(output > 0, output, 1.0)), 0.0)

    def _point(self, t):
        v = self.base + t * self.direction
        return np.where(np.abs(v) < 1e-15, 0.0, v)

    def value(self, t, u=None):
        v = self._point(t) if u is None else self._point(t)[u]
        if np.any(v < -1e-12):
            raise ArithmeticError("perturbed transition probability is negative")
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(v > 0, v * (np.log(np.where(v > 0, v, 1.0)) - self.log_out), 0.0)
        return (terms * self.p_s).sum(axis=(-2, -1))

    def derivative(self, t, u=None):
        v = self._point(t)
        d = self.direction
        if u is not None:
            v, d = v[u], d[u]
        with np.errstate(divide="ignore", invalid="ignore"):
            logv = np.where(v > 0, np.log(np.where(v > 0, v, 1.0)), -np.inf)
            terms = np.where(d != 0, d * (logv - self.log_out), 0.0)
        return (terms * self.p_s).sum(axis=(-2, -1))

    def second_derivative(self, t, u=None):
        v = self._point(t)
        d = self.direction
        if u is not None:
            v, d = v[u], d[u]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(d != 0, d * d / v, 0.0)
        return (terms * self.p_s).sum(axis=(-2, -1))


def erasure_family(model, reference=None, strategies=None):
    ref = reference or no_csi_reference(model)
    strat = strategies or enumerate_strategies(model.x_size, model.s_size + 1, erasure=True)
    tabs = perturbation_tables(model, strat, "erasure")
    fam = PerturbedDivergence(tabs.base, tabs.delta, model.state_dist, ref.output, 1.0)
    return fam, tabs, strat, ref


def symmetric_family(model, reference=None, strategies=None):
    ref = reference or no_csi_reference(model)
    strat = strategies or enumerate_strategies(model.x_size, model.s_size)
    tabs = perturbation_tables(model, strat, "symmetric")
    fam = PerturbedDivergence(tabs.base, tabs.omega, model.state_dist, ref.output,
                              1.0 / model.s_size)
    return fam, tabs, strat, ref


def d_ge(model, epsilon, u, reference=None):
    """Per-strategy divergence under erasure probability ``epsilon`` with the embedded no-CSI input."""
    fam = erasure_family(model, reference)[0]
    return float(fam.value(epsilon, u))


def d_ge_derivative(model, epsilon, u, reference=None):
    fam = erasure_family(model, reference)[0]
    return float(fam.derivative(epsilon, u))


def d_gs(model, q, u, reference=None):
    fam = symmetric_family(model, reference)[0]
    return float(fam.value(q, u))


# --- breakpoints -------------------------------------------------------------

@dataclass
class Breakpoint:
    u: int
    value: float
    case: str  # "below-everywhere", "stuck-at-one" or "interior-root"


def _bisect(f, lo, hi, tol):
    """Root of f on [lo, hi] given f(lo) > 0 >= f(hi)."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def breakpoint(family, u, capacity, tol=ROOT_TOL):
    """Smallest noise level from which strategy ``u`` stays at or below ``capacity``."""
    top = family.upper
    v0 = float(family.value(0.0, u))
    if v0 <= capacity + VALUE_SLACK:
        return Breakpoint(u, 0.0, "below-everywhere")
    # convex in the noise level: locate the minimizer through the sign of the slope
    if family.derivative(top, u) <= FLAT_SLOPE:
        m = top
    elif family.derivative(0.0, u) >= 0:
        m = 0.0
    else:
        m = _bisect(lambda t: -family.derivative(t, u), 0.0, top, tol * 1e-2)
    vm = float(family.value(m, u))
    if vm >= capacity - VALUE_SLACK:
        if vm > capacity + 1e-7:
            trace = [(t, float(family.value(t, u))) for t in np.linspace(0, top, 11)]
            raise RootBracketError(
                f"strategy {u}: divergence never drops to the reference capacity", trace)
        return Breakpoint(u, top, "stuck-at-one")
    root = _bisect(lambda t: family.value(t, u) - capacity, 0.0, m, tol)
    return Breakpoint(u, root, "interior-root")


def epsilon_of_u(model, u, tol=ROOT_TOL, reference=None):
    """(breakpoint, case label) of strategy ``u`` in the erasure family."""
    b = breakpoint(erasure_family(model, reference)[0], u, _capacity(model, reference), tol)
    return b.value, b.case


def q_of_u(model, u, tol=ROOT_TOL, reference=None):
    """(breakpoint, case label) of strategy ``u`` in the symmetric family."""
    b = breakpoint(symmetric_family(model, reference)[0], u, _capacity(model, reference), tol)
    return b.value, b.case


def _capacity(model, reference):
    return (reference or no_csi_reference(model)).capacity


@dataclass
class ThresholdResult:
    value: float
    breakpoints: list
    capacity: float


def _threshold(family, capacity, tol):
    bps = [breakpoint(family, u, capacity, tol) for u in range(family.base.shape[0])]
    return ThresholdResult(max(b.value for b in bps), bps, capacity)


def underline_epsilon(model, tol=ROOT_TOL, detail=False):
    """Smallest erasure probability at which the causal capacity equals the no-CSI capacity."""
    fam, _, _, ref = erasure_family(model)
    res = _threshold(fam, ref.capacity, tol)
    return res if detail else res.value


def underline_q(model, tol=ROOT_TOL, detail=False):
    """Smallest symmetric crossover at which the causal capacity equals the no-CSI capacity."""
    fam, _, _, ref = symmetric_family(model)
    res = _threshold(fam, ref.capacity, tol)
    return res if detail else res.value


# --- perfect-CSI side -------------------------------------------------------

@dataclass
class PerfectCsiOptimizers:
    """Per-state optimizer sets of the perfect-CSI capacity.

    ``table[s]`` is one optimizer; states listed in ``free`` accept every
    input law (the per-state channel has identical rows).
    """

    table: np.ndarray
    free: tuple
    exact: bool


def perfect_csi_optimizers(model):
    table = np.zeros((model.s_size, model.x_size))
    free = []
    exact = True
    for s in range(model.s_size):
        w = model.state_channel(s)
        if np.all(w == w[0]):
            table[s] = 1.0 / model.x_size
            free.append(s)
        elif model.x_size == 2:
            a = binary_input_optimizer(w)
            table[s] = [a, 1 - a]
        else:
            table[s] = ba_capacity(w, REFERENCE_TOL, REFERENCE_MAX_ITER).argmax
            exact = False
    return PerfectCsiOptimizers(table, tuple(free), exact)


@dataclass
class OverlineResult:
    value: float
    optimizer: np.ndarray
    exact: bool  # False: a single maximizer was used, value is a lower bound


def _box_search(opt, score):
    """Maximize ``score`` over optimizer tables; free states share one common law."""
    if not opt.free:
        return opt.table, score(opt.table)
    fixed = [s for s in range(opt.table.shape[0]) if s not in opt.free]
    if not fixed:
        return opt.table, score(opt.table)
    if opt.table.shape[1] != 2:
        return opt.table, score(opt.table)
    from scipy.optimize import minimize_scalar

    def table_for(c):
        t = opt.table.copy()
        t[list(opt.free)] = [c, 1 - c]
        return t

    grid = np.linspace(0.0, 1.0, 2001)
    vals = [score(table_for(c)) for c in grid]
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(lambda c: -score(table_for(c)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    best_c = res.x if -res.fun >= vals[k] else grid[k]
    t = table_for(best_c)
    return t, score(t)


def _erasure_score(table):
    return float(table.min(axis=0).sum())


def overline_epsilon(model, detail=False):
    """Largest erasure probability at which the probing capacity equals the perfect-CSI capacity."""
    opt = perfect_csi_optimizers(model)
    table, value = _box_search(opt, _erasure_score)
    res = OverlineResult(min(value, 1.0), table, opt.exact)
    return res if detail else res.value


def overline_q(model, detail=False):
    """Largest symmetric crossover at which the probing capacity equals the perfect-CSI capacity."""
    opt = perfect_csi_optimizers(model)
    table, value = _box_search(opt, column_share_ratio)
    res = OverlineResult(min(value, 1.0 / model.s_size), table, opt.exact)
    return res if detail else res.value


# --- theorem and proposition conditions --------------------------------------

@dataclass
class Verdict:
    holds: bool
    lhs: float
    rhs: float
    note: str = ""


def theorem_checks(model, side):
    """Sufficient conditions on the side channel, each as (verdict, computed lhs, rhs).

    Thm1/Thm1v certify that causal CSI is useless, Thm2/Thm2v/Thm2alt that
    probing is as good as perfect CSI. All are proven for binary input only.
    """
    p_s = model.state_dist
    rho = model.rho
    ns = model.s_size
    h, mi = conditional_entropy_and_mi(joint_from_channel(p_s, side.matrix))
    note = "" if model.x_size == 2 else "proven for binary input only"
    out = {}
    rhs = rho ** 2 / (2 * np.e ** 2)
    out["Thm1"] = Verdict(mi <= rhs, mi, rhs, note)
    margin = erasure_margin(side)
    rhs = 1 - np.exp(-1)
    out["Thm1v"] = Verdict(margin >= rhs, margin, rhs, note)
    rhs = 2 * rho * LOG2 / ((ns - 1) * (np.e - 1)) if ns > 1 else np.inf
    out["Thm2"] = Verdict(h <= rhs, h, rhs, note)
    ratio = ml_offdiag_ratio(ml_estimator(side))
    rhs = 1 / ((ns - 1) * np.e - ns + 2)
    out["Thm2v"] = Verdict(ratio <= rhs, ratio, rhs, note)
    rhs = 4 * rho * LOG2 / (3 + 2 * (np.e - 1) * np.sqrt(2 * ns))
    out["Thm2alt"] = Verdict(h <= rhs, h, rhs, note)
    return out


@dataclass
class PropositionResult:
    holds: bool
    u_plus: tuple
    g_delta: tuple
    slopes: dict = field(default_factory=dict)  # u -> slope at full erasure, for u in U_+ \ G

    @property
    def worst(self):
        return min(self.slopes.values()) if self.slopes else np.inf


def prop1_check(model):
    """Does the erasure threshold sit strictly below one? (decoder knows the state)"""
    fam, tabs, _, ref = erasure_family(model)
    at_one = fam.value(1.0)
    u_plus = tuple(int(u) for u in np.flatnonzero(np.abs(at_one - ref.capacity) <= UPLUS_TOL))
    slopes = {}
    for u in u_plus:
        if u in tabs.g_delta:
            continue
        slopes[u] = float(fam.derivative(1.0, u))
    holds = all(v > STRICT_MARGIN for v in slopes.values())
    return PropositionResult(holds, u_plus, tabs.g_delta, slopes)


def prop2_check(model):
    """Can a perfect-CSI optimizer use the same input support in every state?"""
    opt = perfect_csi_optimizers(model)
    fixed = [s for s in range(model.s_size) if s not in opt.free]
    supports = {tuple(np.flatnonzero(opt.table[s] > MASS_TOL)) for s in fixed}
    return len(supports) <= 1


def prop3_check(model):
    """Erasure-threshold test when the decoder does not see the state."""
    strat = enumerate_strategies(model.x_size, model.s_size + 1, erasure=True)
    tabs = perturbation_tables(model, strat, "erasure")
    p_s = model.state_dist
    avg = model.averaged_channel()
    p_hat = _optimal_input(avg)
    out = p_hat @ avg  # [y]
    # strategy output law at full erasure, and its averaged perturbation direction
    erased = np.einsum("uys,s->uy", tabs.base + tabs.delta, p_s)
    direction = np.einsum("uys,s->uy", tabs.delta, p_s)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.where(erased > 0, np.log(erased) - np.log(out)[None, :], -np.inf)
        div = np.where(erased > 0, erased * log_ratio, 0.0).sum(axis=1)
        slope_terms = np.where(direction != 0, direction * log_ratio, 0.0)
    capacity = float(p_hat @ np.where(avg > 0, avg * np.log(np.where(avg > 0, avg, 1) / out), 0).sum(axis=1))
    u_plus = tuple(int(u) for u in np.flatnonzero(np.abs(div - capacity) <= UPLUS_TOL))
    g = tuple(int(u) for u in np.flatnonzero(np.abs(direction).max(axis=1) < 1e-10))
    slopes = {u: float(slope_terms[u].sum()) for u in u_plus if u not in g}
    holds = all(v > STRICT_MARGIN for v in slopes.values())
    return PropositionResult(holds, u_plus, g, slopes)


# --- closed forms for the binary example --------------------------------------

def _plogq(p, q):
    return 0.0 if p == 0 else p * np.log(q)


def eta(theta):
    """(1 - theta) log(1 + theta) + theta log(theta); negative strictly inside (0, 1)."""
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    return (1 - theta) * np.log1p(theta) + _plogq(theta, theta)


def example_lower_capacity(theta):
    if theta in (0, 1):
        return LOG2 if theta == 0 else 0.0
    return 0.5 * ((1 - theta) * LOG2 + np.log(2 / (1 + theta))
                  + theta * np.log(2 * theta / (1 + theta)))


def example_upper_capacity(theta):
    if theta in (0, 1):
        return LOG2 if theta == 0 else 0.0
    return np.log1p((1 - theta) * theta ** (theta / (1 - theta)))


def appendix_b_roots(theta, tol=ROOT_TOL):
    """Closed-form-equation thresholds of the binary example, solved by bisection.

    Both equations have the form f(t) = target with f convex and minimized at
    t = 1/2, so each root is bracketed on (0, 1/2) where f decreases.
    """
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    if theta in (0, 1):
        return 0.0, 0.0
    a = 1 - theta

    def f(t):
        return _plogq(t * a, 2 * t) + (1 - t * a) * np.log(2 * (1 - t * a) / (1 + theta))

    eps_target = a * LOG2 + theta * np.log(2 * theta / (1 + theta))
    q_target = example_lower_capacity(theta)
    eps_hat = _bisect(lambda t: f(t) - eps_target, 0.0, 0.5, tol)
    q_hat = _bisect(lambda t: f(t) - q_target, 0.0, 0.5, tol)
    return eps_hat, q_hat


def appendix_c_closed_forms(theta):
    """(erasure threshold, crossover threshold, perfect-CSI optimizer [s, x]).

    Inside (0, 1) the optimizer is unique. At the endpoints every state is
    noiseless or useless, the thresholds take their trivial values and the
    uniform table is returned.
    """
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    if theta in (0, 1):
        return 1.0, 0.5, np.full((2, 2), 0.5)
    k = theta ** (theta / (1 - theta))
    norm = 1 / (1 + (1 - theta) * k)
    same = norm * k
    other = norm * (1 - theta ** (1 / (1 - theta)))
    table = np.array([[same, other], [other, same]])
    return 2 * same, same, table


# --- full report -------------------------------------------------------------

@dataclass
class ThresholdReport:
    underline_epsilon: float
    underline_q: float
    overline_epsilon: float
    overline_q: float
    epsilon_breakpoints: list
    q_breakpoints: list
    overline_exact: bool
    conditions: dict

    def rows(self):
        yield ("underline_epsilon", self.underline_epsilon)
        yield ("underline_q", self.underline_q)
        yield ("overline_epsilon", self.overline_epsilon)
        yield ("overline_q", self.overline_q)


def hbar_value(model, side):
    h, _ = conditional_entropy_and_mi(joint_from_channel(model.state_dist, side.matrix))
    return h / (2 * model.rho * LOG2)


def threshold_report(model, side=None, tol=ROOT_TOL):
    ue = underline_epsilon(model, tol, detail=True)
    uq = underline_q(model, tol, detail=True)
    oe = overline_epsilon(model, detail=True)
    oq = overline_q(model, detail=True)
    conditions = {}
    if side is not None:
        conditions.update(theorem_checks(model, side))
    p1 = prop1_check(model)
    conditions["Prop1"] = Verdict(p1.holds, p1.worst, STRICT_MARGIN)
    p2 = prop2_check(model)
    conditions["Prop2"] = Verdict(p2, float(p2), 1.0)
    p3 = prop3_check(model)
    conditions["Prop3"] = Verdict(p3.holds, p3.worst, STRICT_MARGIN)
    return ThresholdReport(ue.value, uq.value, oe.value, oq.value, ue.breakpoints,
                           uq.breakpoints, oe.exact and oq.exact, conditions)
