"""Three channels where the threshold propositions fail, and what the capacities do there."""

from statecap import (
    bec,
    bsc,
    capacity_causal,
    capacity_full_csi,
    capacity_no_csi,
    capacity_no_decoder_csi,
    capacity_probing,
)
from statecap.channels import (
    ternary_counterexample_causal,
    ternary_counterexample_probing,
    xor_channel,
)
from statecap.thresholds import prop1_check, prop2_check, prop3_check

# Ternary input: noisy causal state still helps at 90% erasures.
m = ternary_counterexample_causal()
print("ternary causal channel")
print(f"  erasure threshold below one certified: {prop1_check(m).holds}")
print(f"  C(BEC 0.9) - C_lower = {capacity_causal(m, bec(0.9)).value - capacity_no_csi(m).value:.3e}")

# Perfect-state optimizers use different supports, so any crossover hurts probing.
m = ternary_counterexample_probing()
print("ternary probing channel")
print(f"  common optimizer support: {prop2_check(m)}")
print(f"  C_upper - C'(BSC 0.1) = {capacity_full_csi(m).value - capacity_probing(m, bsc(0.1)).value:.3e}")

# Decoder blind to the state: the XOR channel keeps a gain at every erasure level below one.
m = xor_channel(0.25)
print("xor channel, decoder without the state")
res = prop3_check(m)
print(f"  threshold test holds: {res.holds}  (slopes at full erasure: {res.slopes})")
for eps in (0.0, 0.5, 0.9, 1.0):
    low, tilde = capacity_no_decoder_csi(m, bec(eps))
    print(f"  eps = {eps:.1f}: C_tilde = {tilde.value:.8f}  C_tilde_lower = {low.value:.8f}")
