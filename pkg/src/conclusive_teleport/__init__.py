"""Simulation of conclusive teleportation over partially entangled pure channels."""
from .analysis import (
    AnalyticReport,
    TrialSummary,
    analytic_outcome_probs,
    haar_random_input,
    monte_carlo,
    sweep_alpha,
)
from .measurement import (
    Povm,
    ProjectorSet,
    apply_povm,
    born_probabilities,
    build_idp_povm,
    measure_projective,
    validate_povm,
)
from .protocols import (
    ChannelSpec,
    InputQubit,
    TeleportationRecord,
    build_phi_basis,
    build_projectors,
    encode_classical_message,
    enumerate_branches,
    prepare_joint_state,
    run_bbcjpw,
    run_mor_horodecki,
    run_qubit_assisted,
)
from .statevec import StateVector, apply_gate, extract_subsystem, fidelity, tensor_product

__version__ = "0.1.0"
