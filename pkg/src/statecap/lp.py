"""Dense two-phase simplex with Bland's rule.

Meant for the tiny feasibility problems that arise when testing whether one
channel is a degraded version of another, where determinism matters more
than speed.
"""

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-12


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray
    objective: float
    phase1_objective: float
    iterations: int


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    basis[row] = col


def _run(T, basis, allowed, max_iter):
    """Minimize the objective held in the last row of ``T`` (Bland's rule)."""
    m = T.shape[0] - 1
    for it in range(max_iter):
        cost = T[-1, :-1]
        entering = next((j for j in allowed if cost[j] < -PIVOT_TOL), None)
        if entering is None:
            return "optimal", it
        col = T[:m, entering]
        best_row, best_ratio = None, np.inf
        for i in range(m):
            if col[i] > PIVOT_TOL:
                ratio = T[i, -1] / col[i]
                if ratio < best_ratio - PIVOT_TOL or (
                    abs(ratio - best_ratio) <= PIVOT_TOL and basis[i] < basis[best_row]
                ):
                    best_row, best_ratio = i, ratio
        if best_row is None:
            return "unbounded", it
        _pivot(T, basis, best_row, entering)
    raise RuntimeError("simplex iteration limit reached")


def linprog_standard(A, b, c=None, feas_tol=1e-9, max_iter=10_000):
    """Solve min c.x subject to A x = b, x >= 0.

    With ``c=None`` only phase 1 runs and any feasible point is returned.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # columns: n originals, m artificials, rhs
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))

    _, it1 = _run(T, basis, range(n + m), max_iter)
    phase1 = -T[-1, -1]
    if phase1 > feas_tol:
        x = _extract(T, basis, n)
        return LPResult("infeasible", x, np.nan, phase1, it1)

    # drive zero-level artificials out of the basis where possible
    for i, var in enumerate(basis):
        if var >= n:
            nz = np.flatnonzero(np.abs(T[i, :n]) > PIVOT_TOL)
            if nz.size:
                _pivot(T, basis, i, int(nz[0]))

    it2 = 0
    if c is not None:
        c = np.asarray(c, dtype=float)
        T[-1, :] = 0.0
        T[-1, :n] = c
        for i, var in enumerate(basis):
            if var < n and c[var] != 0.0:
                T[-1] -= c[var] * T[i]
        status, it2 = _run(T, basis, range(n), max_iter)
        if status == "unbounded":
            return LPResult("unbounded", _extract(T, basis, n), -np.inf, phase1, it1 + it2)
    x = _extract(T, basis, n)
    obj = float(c @ x) if c is not None else 0.0
    return LPResult("optimal", x, obj, phase1, it1 + it2)


def _extract(T, basis, n):
    x = np.zeros(n)
    for i, var in enumerate(basis):
        if var < n:
            x[var] = T[i, -1]
    return np.clip(x, 0.0, None)
