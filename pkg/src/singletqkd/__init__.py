"""Simulator for polarization key distribution over collective-noise channels.

Key bits are encoded in how photons are singlet-paired: four-photon pure
codewords or three-photon mixed codewords, both invariant under any
rotation applied identically to all photons of a multiplet. The package
provides the exact small-system linear algebra, the codewords, a fiber
model with loss and drift, the receiver's error-free discrimination rules,
full protocol sessions with reconciliation and privacy amplification,
canonical eavesdropping strategies, and a CLI for runs, sweeps, and
verification.
"""

from .adversary import AttackConfig, Eavesdropper, intercept_resend, pair_guess_usd, usd_attack
from .channel import Channel, ChannelConfig, MultipletPayload, fresh_payload, loss_mask, transmit
from .codewords import (
    PairingDiagram,
    abc_states,
    discard_photon,
    quartet_pairing,
    quartet_state,
    singlet,
    surviving_trio_index,
    trio_pairing,
    trio_state,
)
from .decoder import BasisChoice, Classification, classify_quartet, classify_trio, measure_multiplet
from .protocol import (
    KeyMaterial,
    ProtocolConfig,
    SessionReport,
    SessionResult,
    alice_prepare_round,
    estimate_error,
    final_key_length,
    privacy_amplify,
    reconcile,
    run_session,
    sift,
)
from .qmath import (
    DensityMatrix,
    QubitUnitary,
    StateVector,
    apply_collective,
    haar_su2,
    measure_product_basis,
    outcome_distribution,
    overlap,
    partial_trace,
    tensor,
    trace_distance,
)
from .seeding import derive_rng, derive_seed
from .transcript import Transcript

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "BasisChoice",
    "Channel",
    "ChannelConfig",
    "Classification",
    "DensityMatrix",
    "Eavesdropper",
    "KeyMaterial",
    "MultipletPayload",
    "PairingDiagram",
    "ProtocolConfig",
    "QubitUnitary",
    "SessionReport",
    "SessionResult",
    "StateVector",
    "Transcript",
    "abc_states",
    "alice_prepare_round",
    "apply_collective",
    "classify_quartet",
    "classify_trio",
    "derive_rng",
    "derive_seed",
    "discard_photon",
    "estimate_error",
    "final_key_length",
    "fresh_payload",
    "haar_su2",
    "intercept_resend",
    "loss_mask",
    "measure_multiplet",
    "measure_product_basis",
    "outcome_distribution",
    "overlap",
    "pair_guess_usd",
    "partial_trace",
    "privacy_amplify",
    "quartet_pairing",
    "quartet_state",
    "reconcile",
    "run_session",
    "sift",
    "singlet",
    "surviving_trio_index",
    "tensor",
    "trace_distance",
    "transmit",
    "trio_pairing",
    "trio_state",
    "usd_attack",
]
