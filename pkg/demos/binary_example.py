"""Walk through the two-state binary example: capacities, plateaus and thresholds.

Run with:  python3 demos/binary_example.py [theta]
"""

import sys

import numpy as np

from statecap import (
    bec,
    bsc,
    capacity_causal,
    capacity_full_csi,
    capacity_no_csi,
    capacity_probing,
    example_sz_channel,
)
from statecap.thresholds import overline_epsilon, overline_q, underline_epsilon, underline_q

theta = float(sys.argv[1]) if len(sys.argv) > 1 else 0.5
model = example_sz_channel(theta)

c_lo = capacity_no_csi(model).value
c_up = capacity_full_csi(model).value
print(f"theta = {theta}")
print(f"no state at the encoder      C_lower = {c_lo:.9f} nats")
print(f"perfect state at the encoder C_upper = {c_up:.9f} nats")

# The causal capacity C falls to C_lower well before the side channel is fully
# erased, while the probing capacity C' holds C_upper for a long stretch.
e_lo, e_up = underline_epsilon(model), overline_epsilon(model)
print(f"\nerasure side channel: C = C_lower from eps = {e_lo:.6f}, C' = C_upper up to eps = {e_up:.6f}")
print(f"{'eps':>6} {'C':>12} {'C_probing':>12}")
for eps in np.linspace(0, 1, 11):
    side = bec(eps)
    print(f"{eps:6.2f} {capacity_causal(model, side).value:12.8f} {capacity_probing(model, side).value:12.8f}")

q_lo, q_up = underline_q(model), overline_q(model)
print(f"\nsymmetric side channel: C = C_lower from q = {q_lo:.6f}, C' = C_upper up to q = {q_up:.6f}")
print(f"{'q':>6} {'C':>12} {'C_probing':>12}")
for q in np.linspace(0, 0.5, 11):
    side = bsc(q)
    print(f"{q:6.2f} {capacity_causal(model, side).value:12.8f} {capacity_probing(model, side).value:12.8f}")
