"""Capacities of channels with state when the encoder sees a noisy version of the state."""

from .capacity import (
    CapacitySolution,
    GpSolution,
    ba_capacity,
    capacity_causal,
    capacity_full_csi,
    capacity_gp,
    capacity_no_csi,
    capacity_no_decoder_csi,
    capacity_probing,
)
from .channels import (
    SideChannel,
    SpecError,
    StateChannelModel,
    bec,
    bsc,
    example_sz_channel,
    generalized_erasure,
    generalized_symmetric,
    load_spec,
    parse_spec,
    serialize_spec,
    ternary_counterexample_causal,
    ternary_counterexample_probing,
    xor_channel,
)
from .degradation import erasure_degradation_witness, stochastic_degradation_lp
from .strategies import enumerate_strategies, induced_channel
from .sweeps import figure_spec, run_sweep
from .thresholds import (
    appendix_b_roots,
    appendix_c_closed_forms,
    overline_epsilon,
    overline_q,
    prop1_check,
    prop2_check,
    prop3_check,
    theorem_checks,
    threshold_report,
    underline_epsilon,
    underline_q,
)

__version__ = "0.1.0"
