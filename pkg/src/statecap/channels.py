"""State-dependent channels, side channels and the named example channels."""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .probability import NORMALIZE_TOL, prob_vector, stochastic_matrix


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateChannelModel:
    """A channel p(y|x,s) together with the state law p_S.

    ``transition`` is indexed ``[x, s, y]``.
    """

    transition: np.ndarray
    state_dist: np.ndarray
    name: str = ""

    def __post_init__(self):
        w = np.asarray(self.transition, dtype=float)
        if w.ndim != 3:
            raise ValueError(f"transition must be indexed [x, s, y], got shape {w.shape}")
        nx, ns, ny = w.shape
        rows = stochastic_matrix(w.reshape(nx * ns, ny)).reshape(nx, ns, ny)
        p_s = prob_vector(self.state_dist)
        if p_s.size != ns:
            raise ValueError(f"state_dist has {p_s.size} entries but the channel has {ns} states")
        if p_s.min() <= 0:
            raise ValueError(
                f"state {int(np.argmin(p_s))} has zero probability; "
                "rho = min p_S must be positive (merge or drop unused states)"
            )
        object.__setattr__(self, "transition", _frozen(rows))
        object.__setattr__(self, "state_dist", _frozen(p_s))

    @property
    def x_size(self):
        return self.transition.shape[0]

    @property
    def s_size(self):
        return self.transition.shape[1]

    @property
    def y_size(self):
        return self.transition.shape[2]

    @property
    def rho(self):
        return float(self.state_dist.min())

    def state_channel(self, s):
        """The |X| x |Y| channel used when the state is ``s``."""
        return self.transition[:, s, :]

    def joint_output_channel(self):
        """X -> (Y, S) with rows p_S(s) p(y|x,s), output index y-major (y * |S| + s)."""
        t = self.transition * self.state_dist[None, :, None]
        return np.ascontiguousarray(t.transpose(0, 2, 1)).reshape(self.x_size, -1)

    def averaged_channel(self):
        """X -> Y with the state averaged out (no state at either end)."""
        return np.einsum("s,xsy->xy", self.state_dist, self.transition)

    def __eq__(self, other):
        if not isinstance(other, StateChannelModel):
            return NotImplemented
        return (
            self.transition.shape == other.transition.shape
            and np.array_equal(self.transition, other.transition)
            and np.array_equal(self.state_dist, other.state_dist)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SideChannel:
    """Noisy state observation p(t|s), indexed ``[s, t]``.

    ``kind`` records the parametric family ("erasure", "symmetric") when the
    matrix came from one of the generators; for erasure channels the last
    column is the erasure symbol.
    """

    matrix: np.ndarray
    kind: str = ""
    param: float = float("nan")
    labels: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(stochastic_matrix(self.matrix)))
        if self.kind not in ("", "erasure", "symmetric"):
            raise ValueError(f"unknown side channel kind {self.kind!r}")

    @property
    def s_size(self):
        return self.matrix.shape[0]

    @property
    def t_size(self):
        return self.matrix.shape[1]

    @property
    def is_erasure(self):
        return self.kind == "erasure"

    def __eq__(self, other):
        if not isinstance(other, SideChannel):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


def generalized_erasure(epsilon, state_size):
    """Reveal the state with probability 1-eps, else output the erasure symbol (last column)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"erasure probability {epsilon} outside [0, 1]")
    m = np.zeros((state_size, state_size + 1))
    m[np.arange(state_size), np.arange(state_size)] = 1.0 - epsilon
    m[:, -1] = epsilon
    labels = tuple(str(s) for s in range(state_size)) + ("*",)
    return SideChannel(m, kind="erasure", param=float(epsilon), labels=labels)


def generalized_symmetric(q, state_size):
    """Diagonal 1-(|S|-1)q, every off-diagonal entry q; q ranges over [0, 1/|S|]."""
    if not 0.0 <= q <= 1.0 / state_size + 1e-15:
        raise ValueError(f"crossover probability {q} outside [0, 1/{state_size}]")
    m = np.full((state_size, state_size), float(q))
    np.fill_diagonal(m, 1.0 - (state_size - 1) * q)
    return SideChannel(np.clip(m, 0.0, 1.0), kind="symmetric", param=float(q))


def bec(epsilon):
    return generalized_erasure(epsilon, 2)


def bsc(q):
    return generalized_symmetric(q, 2)


def identity_side(state_size):
    return SideChannel(np.eye(state_size))


def example_sz_channel(theta):
    """Binary example: a Z-channel in state 0 and its mirror image in state 1.

    In state 0, input 0 flips to 1 with probability theta and input 1 is
    noiseless; state 1 swaps the roles. The state is uniform.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta = {theta} outside [0, 1]")
    w = np.zeros((2, 2, 2))
    w[0, 0] = [1 - theta, theta]
    w[1, 0] = [0.0, 1.0]
    w[1, 1] = [theta, 1 - theta]
    w[0, 1] = [1.0, 0.0]
    return StateChannelModel(w, [0.5, 0.5], name=f"sz(theta={theta:g})")


def _table(entries, shape):
    w = np.zeros(shape)
    for (x, y, s), v in entries.items():
        w[x, s, y] = v
    return w


def ternary_counterexample_causal():
    """Ternary-input channel for which erasure-side information never becomes useless."""
    entries = {
        (0, 0, 0): 1, (1, 1, 1): 1,
        (0, 1, 0): 0, (1, 0, 1): 0,
        (1, 0, 0): 0.4, (0, 1, 1): 0.4,
        (1, 1, 0): 0.6, (0, 0, 1): 0.6,
        (2, 0, 0): 0.3, (2, 0, 1): 0.2,
        (2, 1, 0): 0.7, (2, 1, 1): 0.8,
    }
    return StateChannelModel(_table(entries, (3, 2, 2)), [0.5, 0.5], name="ternary-causal")


def ternary_counterexample_probing():
    """Ternary-input channel whose perfect-CSI optimizer changes support with the state."""
    entries = {
        (0, 0, 0): 1, (2, 1, 1): 1,
        (0, 1, 0): 0, (2, 0, 1): 0,
        (1, 0, 0): 0.4, (0, 1, 1): 0.4,
        (1, 1, 0): 0.6, (0, 0, 1): 0.6,
        (2, 0, 0): 0.8, (1, 1, 1): 0.8,
        (2, 1, 0): 0.2, (1, 0, 1): 0.2,
    }
    return StateChannelModel(_table(entries, (3, 2, 2)), [0.5, 0.5], name="ternary-probing")


def xor_channel(mu=0.25):
    """Y = X xor S with P(S = 1) = mu."""
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"mu = {mu} outside [0, 1)")
    w = np.zeros((2, 2, 2))
    for x in range(2):
        for s in range(2):
            w[x, s, x ^ s] = 1.0
    if mu == 0.0:
        # a single state keeps rho > 0
        return StateChannelModel(w[:, :1, :], [1.0], name="xor(mu=0)")
    return StateChannelModel(w, [1 - mu, mu], name=f"xor(mu={mu:g})")


def counterexample_channels(mu=0.25):
    return ternary_counterexample_causal(), ternary_counterexample_probing(), xor_channel(mu)


# --- channel spec documents -------------------------------------------------

class SpecError(ValueError):
    """Malformed channel-spec document; the message names the offending field."""


def _number(value, where):
    if isinstance(value, bool):
        raise SpecError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise SpecError(f"{where}: cannot parse {value!r} as a number")


def _row(values, where, length):
    if not isinstance(values, (list, tuple)):
        raise SpecError(f"{where}: expected a list of {length} numbers")
    if len(values) != length:
        raise SpecError(f"{where}: expected {length} entries, got {len(values)}")
    row = np.array([_number(v, f"{where}[{j}]") for j, v in enumerate(values)])
    if np.any(row < 0):
        raise SpecError(f"{where}: negative probability")
    if abs(row.sum() - 1.0) > NORMALIZE_TOL:
        raise SpecError(f"{where}: entries sum to {row.sum()!r}, not 1")
    return row


def model_from_dict(doc):
    """Build ``(model, side_or_None)`` from a parsed spec mapping."""
    import numbers

    if not isinstance(doc, dict):
        raise SpecError("spec document must be a mapping")
    sizes = {}
    for key in ("x_size", "y_size", "s_size"):
        v = doc.get(key)
        if not isinstance(v, numbers.Integral) or isinstance(v, bool) or v < 1:
            raise SpecError(f"{key}: expected a positive integer, got {v!r}")
        sizes[key] = int(v)
    nx, ny, ns = sizes["x_size"], sizes["y_size"], sizes["s_size"]

    rows = doc.get("transition")
    if not isinstance(rows, list) or len(rows) != nx * ns:
        raise SpecError(f"transition: expected {nx * ns} rows in (x, s) order, x-major")
    w = np.zeros((nx, ns, ny))
    for i, r in enumerate(rows):
        x, s = divmod(i, ns)
        w[x, s] = _row(r, f"transition row {i} (x={x}, s={s})", ny)

    p_s = _row(doc.get("state_dist"), "state_dist", ns)
    if p_s.min() <= 0:
        raise SpecError(f"state_dist: state {int(np.argmin(p_s))} has zero probability (rho = 0)")
    model = StateChannelModel(w, p_s, name=str(doc.get("name", "")))

    side = None
    sd = doc.get("side_channel")
    if sd is not None:
        if not isinstance(sd, dict):
            raise SpecError("side_channel: expected a mapping")
        kind = sd.get("kind", "") or ""
        if kind not in ("", "erasure", "symmetric"):
            raise SpecError(f"side_channel.kind: unknown family {kind!r}")
        if "matrix" in sd:
            mat = sd["matrix"]
            if not isinstance(mat, list) or len(mat) != ns:
                raise SpecError(f"side_channel.matrix: expected {ns} rows (one per state)")
            width = len(mat[0]) if isinstance(mat[0], list) else -1
            m = np.array([_row(r, f"side_channel.matrix row {s}", width) for s, r in enumerate(mat)])
            param = _number(sd["param"], "side_channel.param") if "param" in sd else float("nan")
            side = SideChannel(m, kind=kind, param=param)
        elif kind == "erasure":
            side = generalized_erasure(_number(sd.get("param"), "side_channel.param"), ns)
        elif kind == "symmetric":
            side = generalized_symmetric(_number(sd.get("param"), "side_channel.param"), ns)
        else:
            raise SpecError("side_channel: needs either 'matrix' or a kind with 'param'")
    return model, side


def model_to_dict(model, side=None):
    doc = {}
    if model.name:
        doc["name"] = model.name
    doc["x_size"] = model.x_size
    doc["y_size"] = model.y_size
    doc["s_size"] = model.s_size
    doc["state_dist"] = [float(v) for v in model.state_dist]
    doc["transition"] = [
        [float(v) for v in model.transition[x, s]]
        for x in range(model.x_size)
        for s in range(model.s_size)
    ]
    if side is not None:
        sd = {}
        if side.kind:
            sd["kind"] = side.kind
        if not np.isnan(side.param):
            sd["param"] = float(side.param)
        sd["matrix"] = [[float(v) for v in row] for row in side.matrix]
        doc["side_channel"] = sd
    return doc


def parse_spec(text):
    """Parse a YAML channel-spec document into ``(model, side_or_None)``."""
    import yaml

    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpecError(f"not a valid YAML document: {exc}") from None
    try:
        return model_from_dict(doc)
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def serialize_spec(model, side=None):
    import yaml

    # repr-exact floats keep the document round-trip stable
    return yaml.safe_dump(model_to_dict(model, side), sort_keys=False, default_flow_style=None)


def load_spec(path):
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())
