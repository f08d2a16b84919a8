"""Shannon strategies and the channels they induce.

A strategy is a map from the encoder's observation alphabet to the input
alphabet. Enumerating all of them turns causal side information into an
ordinary DMC whose input is the strategy index ``u``.
"""

import itertools
from dataclasses import dataclass

import numpy as np

DEFAULT_CAP = 4096
# Strategies whose perturbation table is this small count as unperturbed.
MEMBERSHIP_TOL = 1e-10


class EnumerationCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class StrategyTable:
    """``table[u, t]`` is the input sent under strategy ``u`` when observing ``t``.

    The first ``x_size`` rows are the constant strategies ``u -> u``.
    """

    table: np.ndarray
    x_size: int
    erasure_layout: bool = False

    @property
    def size(self):
        return self.table.shape[0]

    @property
    def t_size(self):
        return self.table.shape[1]

    def format(self, labels=None):
        """Render the table with one row per strategy, as in a printed spec sheet."""
        labels = labels or [str(t) for t in range(self.t_size)]
        if self.erasure_layout and labels[-1] != "*":
            labels = list(labels[:-1]) + ["*"]
        width = max(4, len(str(self.size - 1)) + 2)
        head = "psi(u,t)".ljust(width + 4) + " ".join(f"t={lab}".rjust(5) for lab in labels)
        lines = [head]
        for u, row in enumerate(self.table):
            lines.append(f"u={u}".ljust(width + 4) + " ".join(str(v).rjust(5) for v in row))
        return "\n".join(lines)


def _plain_order(x_size, t_size):
    constants = [(c,) * t_size for c in range(x_size)]
    rest = [
        tup for tup in itertools.product(range(x_size), repeat=t_size)
        if len(set(tup)) > 1
    ]
    return constants + rest


def _erasure_order(x_size, t_size):
    # Built from the ordering over the non-erasure symbols, with the erasure
    # column appended: constants, then constant-on-S maps with a different
    # erasure value, then the remaining maps with erasure value ascending.
    base = _plain_order(x_size, t_size - 1)
    order = [base[c] + (c,) for c in range(x_size)]
    flipped = [(x, c) for c in range(x_size) for x in range(x_size) if x != c]
    flipped.sort()
    order += [base[c] + (x,) for x, c in flipped]
    for r in base[x_size:]:
        order += [r + (x,) for x in range(x_size)]
    return order


def enumerate_strategies(x_size, t_size, erasure=False, cap=DEFAULT_CAP):
    """All ``x_size ** t_size`` strategies in canonical order.

    With ``erasure=True`` the last observation symbol is the erasure symbol
    and the ordering is the erasure extension of the plain ordering over the
    remaining symbols.
    """
    if x_size < 1 or t_size < 1:
        raise ValueError("alphabet sizes must be positive")
    count = x_size ** t_size
    if count > cap:
        raise EnumerationCapExceeded(
            f"|U| = {x_size}^{t_size} = {count} exceeds the enumeration cap {cap}"
        )
    if x_size == 1:
        rows = [(0,) * t_size]
    elif erasure and t_size >= 2:
        rows = _erasure_order(x_size, t_size)
    else:
        rows = _plain_order(x_size, t_size)
    table = np.array(rows, dtype=np.intp).reshape(count, t_size)
    table.setflags(write=False)
    return StrategyTable(table, x_size, erasure_layout=bool(erasure and t_size >= 2))


def strategies_for(model, side, cap=DEFAULT_CAP):
    if side.s_size != model.s_size:
        raise ValueError(
            f"side channel has {side.s_size} input states, model has {model.s_size}"
        )
    return enumerate_strategies(model.x_size, side.t_size, erasure=side.is_erasure, cap=cap)


def induced_channel(model, side, strategies=None):
    """The DMC from strategy index ``u`` to the pair (Y, S).

    Rows are p(y, s | u) = sum_t p_S(s) p(t|s) p(y | psi(u, t), s) with the
    output index linearized y-major (``y * |S| + s``).
    """
    if strategies is None:
        strategies = strategies_for(model, side)
    if side.s_size != model.s_size or strategies.t_size != side.t_size:
        raise ValueError("strategy table, side channel and model sizes do not agree")
    if strategies.x_size != model.x_size:
        raise ValueError("strategy table was built for a different input alphabet")
    weights = model.state_dist[:, None] * side.matrix  # [s, t]
    s_idx = np.arange(model.s_size)
    # chosen[u, t, s, y] = p(y | psi(u, t), s)
    chosen = model.transition[strategies.table[:, :, None], s_idx[None, None, :], :]
    joint = np.einsum("st,utsy->uys", weights, chosen)
    return joint.reshape(strategies.size, -1)


def induced_output_channel(model, side, strategies=None):
    """Strategy index to Y alone (the decoder does not see the state)."""
    full = induced_channel(model, side, strategies)
    return full.reshape(full.shape[0], model.y_size, model.s_size).sum(axis=2)


@dataclass(frozen=True)
class PerturbationTables:
    """Per-strategy perturbation directions, all indexed ``[u, y, s]``.

    ``base`` is p(y | psi(u, s), s). The erasure family moves along ``delta``,
    the symmetric family along ``omega``; ``g_delta``/``g_omega`` list the
    strategies whose direction vanishes.
    """

    base: np.ndarray
    delta: np.ndarray = None
    omega: np.ndarray = None
    g_delta: tuple = ()
    g_omega: tuple = ()


def _unperturbed(direction, tol):
    flat = np.abs(direction).reshape(direction.shape[0], -1)
    return tuple(int(u) for u in np.flatnonzero(flat.max(axis=1) < tol))


def perturbation_tables(model, strategies, family, tol=MEMBERSHIP_TOL):
    ns = model.s_size
    psi = strategies.table
    s_idx = np.arange(ns)
    w = model.transition
    # diag[u, s, y] = p(y | psi(u, s), s)
    diag = w[psi[:, :ns], s_idx[None, :], :]
    base = diag.transpose(0, 2, 1)
    if family == "erasure":
        if strategies.t_size != ns + 1:
            raise ValueError("erasure family needs strategies over S plus the erasure symbol")
        erased = w[psi[:, -1][:, None], s_idx[None, :], :]  # [u, s, y]
        delta = (erased - diag).transpose(0, 2, 1)
        return PerturbationTables(base=base, delta=delta, g_delta=_unperturbed(delta, tol))
    if family == "symmetric":
        if strategies.t_size != ns:
            raise ValueError("symmetric family needs strategies over S itself")
        # all_t[u, t, s, y] = p(y | psi(u, t), s)
        all_t = w[psi[:, :, None], s_idx[None, None, :], :]
        omega = all_t.sum(axis=1) - ns * diag
        omega = omega.transpose(0, 2, 1)
        return PerturbationTables(base=base, omega=omega, g_omega=_unperturbed(omega, tol))
    raise ValueError(f"unknown family {family!r}; expected 'erasure' or 'symmetric'")
