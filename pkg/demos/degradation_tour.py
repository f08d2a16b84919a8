"""Degradation verdicts and the side-channel conditions that certify useless or perfect noisy state."""

import numpy as np

from statecap import bec, bsc, example_sz_channel
from statecap.degradation import (
    erasure_degradation_witness,
    erasure_margin,
    lemma6_condition,
    stochastic_degradation_lp,
)
from statecap.thresholds import theorem_checks

side = bsc(0.2)
print(f"BSC(0.2) erasure margin = {erasure_margin(side):.3f}")
for eps in (0.3, 0.4, 0.5):
    w = erasure_degradation_witness(side, eps)
    lp = stochastic_degradation_lp(side, bec(eps))
    print(f"  degraded from BEC({eps}): margin test {w.degraded}, LP {lp.degraded}")

w = erasure_degradation_witness(side, 0.4)
print("witness channel from BEC(0.4) outputs to BSC(0.2) outputs:")
print(np.array2string(w.witness, precision=4))

print(f"\nsmallest crossover certified degraded from BSC(0.1): {lemma6_condition(bsc(0.1)).threshold:.4f}")

model = example_sz_channel(0.5)
for name, s in (("BEC(0.95)", bec(0.95)), ("BSC(0.01)", bsc(0.01)), ("BSC(0.2)", bsc(0.2))):
    verdicts = theorem_checks(model, s)
    held = [k for k, v in verdicts.items() if v.holds]
    print(f"{name}: conditions met: {', '.join(held) or 'none'}")
