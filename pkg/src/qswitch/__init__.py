"""Entangled-control quantum switch: exact correlations, the classical causal
bound by exhaustive enumeration, an optical-network validation, noise models
with closed-form oracles, and photon-counting statistics."""

from .quantum import (
    Effect,
    LinearOperator,
    bloch_projector,
    born_probability,
    partial_trace,
    phi_plus,
    tensor_product,
)
from .switch import (
    CLASSICAL_BOUND,
    IDEAL_TOTAL,
    CorrelationTable,
    Outcome,
    Setting,
    VbcBreakdown,
    full_table,
    joint_distribution,
    vbc_terms,
)
from .strategies import (
    N_STRATEGIES,
    ClassicalBound,
    DeterministicStrategy,
    classical_max,
    strategy_outcomes,
    strategy_table,
)
from .optics import (
    ModeState,
    OpticalElement,
    SwitchNetwork,
    build_switch_network,
    jones_matrix,
    measurement_rotation,
    simulate_network,
)
from .noise import (
    NoiseParams,
    dephase_control,
    noise_oracle_terms,
    noise_oracle_total,
    threshold_visibility,
    vbc_under_noise,
    visibility_from_fidelity,
    werner_state,
)
from .stats import (
    CountsTable,
    Estimate,
    SpacetimeEvent,
    VbcEstimate,
    estimate_vbc,
    is_spacelike,
    sample_counts,
    significance,
)

__version__ = "0.1.0"
