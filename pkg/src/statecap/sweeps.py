"""One-parameter capacity sweeps and their CSV form."""

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .capacity import (
    DEFAULT_TOL,
    capacity_causal,
    capacity_full_csi,
    capacity_gp,
    capacity_no_csi,
    capacity_no_decoder_csi,
    capacity_probing,
)
from .channels import (
    example_sz_channel,
    generalized_erasure,
    generalized_symmetric,
    ternary_counterexample_causal,
    ternary_counterexample_probing,
    xor_channel,
)

BASE_COLUMNS = ("C_lower", "C_causal", "C_probing", "C_upper")
GP_COLUMNS = ("C_gp_lb", "C_gp_ub")
TILDE_COLUMNS = ("C_tilde_lower", "C_tilde")


class SweepError(RuntimeError):
    """A sweep row broke the capacity chain or the monotonicity in the noise level."""


class NonConvergence(RuntimeError):
    pass


@dataclass
class SweepSpec:
    model: object
    family: str  # "erasure" or "symmetric"
    grid: np.ndarray
    gp: bool = False
    tilde: bool = False
    restarts: int = 32

    @property
    def param(self):
        return "epsilon" if self.family == "erasure" else "q"

    def side(self, value):
        n = self.model.s_size
        if self.family == "erasure":
            return generalized_erasure(value, n)
        return generalized_symmetric(value, n)


@dataclass
class SweepResult:
    param: str
    grid: np.ndarray
    columns: tuple
    rows: np.ndarray  # [point, column]
    unconverged: list = field(default_factory=list)

    def column(self, name):
        return self.rows[:, self.columns.index(name)]

    def to_csv(self):
        buf = io.StringIO(newline="")
        buf.write(",".join(("param", "value") + self.columns) + "\n")
        for g, row in zip(self.grid, self.rows):
            cells = [self.param, _fmt(g)] + [_fmt(v) for v in row]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def _fmt(v):
    s = f"{float(v):.12g}"
    return "0" if s == "-0" else s


FIGURES = ("fig3", "fig4", "fig6", "fig7", "fig8", "fig9")


def figure_spec(name, grid_size=None, restarts=32):
    """The channel, side family and grid behind each named figure."""
    if name == "fig3":
        return SweepSpec(example_sz_channel(0.5), "erasure", np.linspace(0, 1, grid_size or 101))
    if name == "fig4":
        return SweepSpec(example_sz_channel(0.5), "symmetric", np.linspace(0, 0.5, grid_size or 101))
    if name == "fig6":
        return SweepSpec(ternary_counterexample_causal(), "erasure", np.linspace(0, 1, grid_size or 101))
    if name == "fig7":
        return SweepSpec(ternary_counterexample_probing(), "symmetric",
                         np.linspace(0, 0.5, grid_size or 101))
    if name == "fig8":
        return SweepSpec(xor_channel(0.25), "erasure", np.linspace(0, 1, grid_size or 101), tilde=True)
    if name == "fig9":
        return SweepSpec(example_sz_channel(0.5), "erasure", np.linspace(0, 1, grid_size or 21),
                         gp=True, restarts=restarts)
    raise ValueError(f"unknown figure {name!r}; expected one of {', '.join(FIGURES)}")


def _point(args):
    spec, value, tol, seed, bases = args
    side = spec.side(value)
    c_lower, c_upper = bases
    causal = capacity_causal(spec.model, side, tol=tol)
    probing = capacity_probing(spec.model, side, tol=tol)
    row = [c_lower, causal.value, probing.value, c_upper]
    ok = causal.converged and probing.converged
    if spec.gp:
        gp = capacity_gp(spec.model, side, restarts=spec.restarts, seed=seed, tol=tol,
                         causal=causal, probing=probing)
        row += [gp.lower_bound, gp.upper_bound]
    if spec.tilde:
        low, up = capacity_no_decoder_csi(spec.model, side, tol=tol)
        row += [low.value, up.value]
        ok = ok and low.converged and up.converged
    return row, ok


def check_invariants(result, tol):
    c_lo, c, c_p, c_up = (result.column(n) for n in BASE_COLUMNS)
    problems = []
    for i, g in enumerate(result.grid):
        if not (c_lo[i] - 2 * tol <= c[i] <= c_p[i] + 2 * tol <= c_up[i] + 4 * tol):
            problems.append(
                f"{result.param}={g:.6g}: chain broken "
                f"(C_lower={c_lo[i]:.12g}, C={c[i]:.12g}, C'={c_p[i]:.12g}, C_upper={c_up[i]:.12g})"
            )
    order = np.argsort(result.grid)
    cs = c[order]
    for a, b in zip(range(len(cs) - 1), range(1, len(cs))):
        if cs[b] > cs[a] + 2 * tol:
            problems.append(
                f"C increases from {cs[a]:.12g} to {cs[b]:.12g} between "
                f"{result.param}={result.grid[order][a]:.6g} and {result.grid[order][b]:.6g}"
            )
    if problems:
        raise SweepError("sweep invariant violated:\n  " + "\n  ".join(problems))


def run_sweep(spec, tol=DEFAULT_TOL, seed=0, workers=1, check=True):
    """Evaluate every grid point; rows come back in grid order whatever the schedule."""
    bases = (capacity_no_csi(spec.model, tol).value, capacity_full_csi(spec.model, tol).value)
    jobs = [(spec, float(v), tol, seed, bases) for v in spec.grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_point, jobs))
    else:
        out = [_point(j) for j in jobs]
    columns = BASE_COLUMNS + (GP_COLUMNS if spec.gp else ()) + (TILDE_COLUMNS if spec.tilde else ())
    result = SweepResult(
        spec.param,
        np.asarray(spec.grid, dtype=float),
        columns,
        np.array([row for row, _ in out]),
        [float(v) for v, (_, ok) in zip(spec.grid, out) if not ok],
    )
    if check:
        check_invariants(result, tol)
    return result
