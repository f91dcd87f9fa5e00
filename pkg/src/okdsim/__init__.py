"""Simulator and library for deterministic optical key distribution over a
phase-addressed two-line interferometric channel."""

__version__ = "0.1.0"

from .addressing import (
    Address,
    AddressRegistry,
    CapacityExhaustedError,
    Topology,
    address_matched,
    allocate,
    capacity,
    compensate_alice,
    compensate_bob,
    export_registry,
    import_registry,
    resolution_for_epsilon,
)
from .adversary import (
    AttackOutcome,
    GuessStrategy,
    ResetPolicy,
    TapReading,
    TapRecord,
    eve_guess,
    offline_flip_attack,
    plugin_mutual_information,
    tap_channel,
    tap_session,
)
from .noise import LIGHT_SPEED, NoiseConfig, coherence_length, drift_process, perturb_detection
from .optics import (
    Classification,
    Detection,
    FieldPair,
    PhaseFrame,
    UNIT_INPUT,
    UndefinedVisibilityError,
    beam_splitter,
    channel_fields,
    classify_visibility,
    forward_mzi,
    interference,
    measure,
    phase_stage,
    propagate,
    round_trip,
    visibility,
)
from .protocol import (
    ChannelConfig,
    ClassifierConfig,
    DUAL_REFERENCE,
    IDENTITY_REFERENCE,
    KeyMaterial,
    ProtocolFaultError,
    ProtocolVariant,
    ReferenceRun,
    SessionTrace,
    alice_encode,
    alice_measure,
    alice_raw_key,
    bob_prepare,
    bob_raw_key,
    privacy_amplify,
    reconcile,
    run_reference,
    run_session,
)

__all__ = [name for name in dir() if not name.startswith("_")]
