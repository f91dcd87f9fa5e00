"""Two-party deterministic key distribution over the phase-controlled channel.

Per slot: Bob draws a key bit and prepares it as a base phase in {0, pi},
Alice reads it off the forward visibility, encodes a basis bit of her own on
the return stage, and Bob closes the loop on the round-trip visibility. Two
derivation variants are supported:

* DUAL_RELATION keeps every clean slot: both the identity outcome
  (visibility -1) and the inversion outcome (+1) map to key bits.
* IDENTITY_ONLY keeps only slots whose bases agree, discarding the rest,
  which halves the rate but never publishes an inversion event.

When the two parties share the channel address, each folds its own control
phase into its base phase (a coordinated pair). A receiver that does not
share the address runs with raw bases, and so does the transmitter side of
that scenario: the uncoordinated round trip then exposes the full control
phase gap in the visibility.
"""

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .addressing import Address, compensate_alice, compensate_bob
from .noise import NoiseConfig, drift_process, perturb_detection
from .optics import (
    Classification,
    PhaseFrame,
    UNIT_INPUT,
    classify_visibility,
    forward_mzi,
    measure,
    override_visibility,
    propagate,
    round_trip,
)


class ProtocolFaultError(RuntimeError):
    """Raised when the two parties' records cannot be reconciled."""


class ProtocolVariant(Enum):
    DUAL_RELATION = "dual"
    IDENTITY_ONLY = "identity"


@dataclass(frozen=True)
class ClassifierConfig:
    epsilon: float = 0.05  # visibility tolerance around +1 / -1
    rng_seed: int = 0  # drives both parties' basis draws


@dataclass(frozen=True)
class ChannelConfig:
    """Address context of a session: the two control-phase dials and whether
    the receiver shares the channel address with the transmitter."""

    bob_control: float = 0.0
    alice_control: float = 0.0
    alice_knows_remote: bool = True


@dataclass(frozen=True)
class SessionTrace:
    """Immutable per-slot protocol record."""

    slot_index: int
    x: int  # Bob's key bit
    v_a: float  # forward visibility at Alice
    y: int | None  # Alice's copy of x, None when the reading errored
    psi1: float  # Alice's base phase before any address shift
    z: int  # Alice's basis bit
    m_a: int | None  # Alice's raw key bit, None = discard
    v_b: float  # round-trip visibility at Bob
    m_b: int | None  # Bob's raw key bit, None = discard
    final: int | None  # post-reconciliation bit, None = dropped slot
    frame: PhaseFrame  # full shifter settings used for the slot


@dataclass
class KeyMaterial:
    raw_bob: list[int | None]
    raw_alice: list[int | None]
    final_bob: list[int]
    final_alice: list[int]
    sampled_error_rate: float = 0.0


def bob_prepare(rng: np.random.Generator) -> tuple[float, int]:
    """Draw the slot's key bit and its base phase, 0 -> 0 rad, 1 -> pi."""
    x = int(rng.integers(0, 2))
    return math.pi * x, x


def alice_encode(rng: np.random.Generator) -> tuple[float, int]:
    """Draw the slot's basis bit and its base phase, 0 -> 0 rad, 1 -> pi."""
    z = int(rng.integers(0, 2))
    return math.pi * z, z


def _to_bit(classification: Classification) -> int | None:
    if classification is Classification.BIT0:
        return 0
    if classification is Classification.BIT1:
        return 1
    return None


def alice_measure(v_a: float, cfg: ClassifierConfig) -> int | None:
    """Read Bob's bit off the forward visibility, None on an unclear reading."""
    return _to_bit(classify_visibility(v_a, cfg.epsilon))


def alice_raw_key(y: int | None, z: int, variant: ProtocolVariant) -> int | None:
    if y is None:
        return None
    if variant is ProtocolVariant.DUAL_RELATION:
        return ((y + z) % 2) ^ 1
    return z if (y + z) % 2 == 0 else None


def bob_raw_key(
    v_b: float, x: int, cfg: ClassifierConfig, variant: ProtocolVariant
) -> int | None:
    outcome = classify_visibility(v_b, cfg.epsilon)
    if variant is ProtocolVariant.DUAL_RELATION:
        # identity outcome (visibility -1) encodes 1, inversion (+1) encodes 0
        return _to_bit(outcome)
    return x if outcome is Classification.BIT1 else None


def reconcile(
    raw_bob: Sequence[int | None], raw_alice: Sequence[int | None]
) -> KeyMaterial:
    """Drop every slot either party discarded; the survivors form the keys."""
    if len(raw_bob) != len(raw_alice):
        raise ProtocolFaultError(
            f"raw key length mismatch: {len(raw_bob)} vs {len(raw_alice)}"
        )
    final_bob: list[int] = []
    final_alice: list[int] = []
    for b, a in zip(raw_bob, raw_alice):
        if b is not None and a is not None:
            final_bob.append(b)
            final_alice.append(a)
    return KeyMaterial(list(raw_bob), list(raw_alice), final_bob, final_alice)


def privacy_amplify(
    key: KeyMaterial, sample_fraction: float, rng_seed: int
) -> tuple[float, KeyMaterial]:
    """Estimate the key error rate on a random sample and drop the sample.

    Returns the sampled mismatch fraction and the shortened key material.
    """
    if not 0.0 < sample_fraction < 1.0:
        raise ValueError("sample_fraction must be in (0, 1)")
    n = len(key.final_bob)
    if n != len(key.final_alice):
        raise ProtocolFaultError("final key lengths differ")
    if n == 0:
        return 0.0, replace(key, sampled_error_rate=0.0)
    rng = np.random.default_rng(rng_seed)
    sample_size = max(1, int(round(sample_fraction * n)))
    picked = set(rng.choice(n, size=sample_size, replace=False).tolist())
    mismatches = sum(1 for i in picked if key.final_bob[i] != key.final_alice[i])
    rate = mismatches / sample_size
    shortened = replace(
        key,
        final_bob=[b for i, b in enumerate(key.final_bob) if i not in picked],
        final_alice=[a for i, a in enumerate(key.final_alice) if i not in picked],
        sampled_error_rate=rate,
    )
    return rate, shortened


def run_session(
    n_slots: int,
    channel: ChannelConfig | None = None,
    noise: NoiseConfig | None = None,
    variant: ProtocolVariant = ProtocolVariant.DUAL_RELATION,
    classifier: ClassifierConfig | None = None,
    *,
    bob_bits: Sequence[int] | None = None,
    alice_bits: Sequence[int] | None = None,
    va_overrides: Mapping[int, float] | None = None,
    vb_overrides: Mapping[int, float] | None = None,
) -> tuple[list[SessionTrace], KeyMaterial]:
    """Run a full key distribution session.

    ``bob_bits`` / ``alice_bits`` pin the per-slot draws (for replaying a
    documented sequence), ``va_overrides`` / ``vb_overrides`` force specific
    measured visibilities by slot index to inject channel faults. Everything
    else follows the configured RNG seeds, so equal configurations reproduce
    equal traces.
    """
    if n_slots < 1:
        raise ValueError("n_slots must be at least 1")
    channel = channel or ChannelConfig()
    noise = noise or NoiseConfig()
    classifier = classifier or ClassifierConfig()
    va_overrides = va_overrides or {}
    vb_overrides = vb_overrides or {}

    rng_bits = np.random.default_rng(classifier.rng_seed)
    rng_detector = np.random.default_rng([noise.rng_seed, 1])
    offsets = drift_process(noise, n_slots)
    bob_address = Address(channel.bob_control, "tx")
    alice_address = Address(channel.alice_control, "rx")

    records = []
    for i in range(n_slots):
        if bob_bits is None:
            phi1_base, x = bob_prepare(rng_bits)
        else:
            x = int(bob_bits[i])
            phi1_base = math.pi * x
        if alice_bits is None:
            psi1_base, z = alice_encode(rng_bits)
        else:
            z = int(alice_bits[i])
            psi1_base = math.pi * z

        if channel.alice_knows_remote:
            phi1 = compensate_bob(phi1_base, bob_address)
            psi1 = compensate_alice(psi1_base, alice_address, True)
        else:
            phi1, psi1 = phi1_base, psi1_base
        frame = PhaseFrame(
            phi1=phi1,
            phi2=channel.bob_control,
            psi1=psi1,
            psi2=channel.alice_control,
            channel_offset=float(offsets[i]),
        )

        forward = measure(propagate(forward_mzi(frame), UNIT_INPUT), classifier.epsilon)
        if noise.detector_noise_sigma > 0.0:
            forward = perturb_detection(forward, noise, rng_detector, classifier.epsilon)
        if i in va_overrides:
            forward = override_visibility(forward, va_overrides[i], classifier.epsilon)
        y = alice_measure(forward.visibility, classifier)

        backward = measure(round_trip(frame, UNIT_INPUT), classifier.epsilon)
        if noise.detector_noise_sigma > 0.0:
            backward = perturb_detection(backward, noise, rng_detector, classifier.epsilon)
        if i in vb_overrides:
            backward = override_visibility(backward, vb_overrides[i], classifier.epsilon)

        m_a = alice_raw_key(y, z, variant)
        m_b = bob_raw_key(backward.visibility, x, classifier, variant)
        records.append(
            (i, x, forward.visibility, y, psi1_base, z, m_a, backward.visibility, m_b, frame)
        )

    keys = reconcile([r[8] for r in records], [r[6] for r in records])
    traces = [
        SessionTrace(
            slot_index=i,
            x=x,
            v_a=v_a,
            y=y,
            psi1=psi1_base,
            z=z,
            m_a=m_a,
            v_b=v_b,
            m_b=m_b,
            final=m_b if (m_a is not None and m_b is not None) else None,
            frame=frame,
        )
        for (i, x, v_a, y, psi1_base, z, m_a, v_b, m_b, frame) in records
    ]
    return traces, keys


@dataclass(frozen=True)
class ReferenceRun:
    """A pinned ten-slot demonstration sequence with injected faults."""

    variant: ProtocolVariant
    bob_bits: tuple[int, ...]
    alice_bits: tuple[int, ...]
    va_overrides: Mapping[int, float]
    vb_overrides: Mapping[int, float]


DUAL_REFERENCE = ReferenceRun(
    ProtocolVariant.DUAL_RELATION,
    bob_bits=(0, 0, 1, 0, 1, 1, 0, 1, 0, 1),
    alice_bits=(1, 0, 0, 1, 1, 1, 0, 0, 1, 0),
    va_overrides={5: -0.8},
    vb_overrides={2: 0.9},
)

IDENTITY_REFERENCE = ReferenceRun(
    ProtocolVariant.IDENTITY_ONLY,
    bob_bits=(0, 0, 1, 0, 1, 1, 0, 1, 0, 0),
    alice_bits=(1, 0, 0, 1, 1, 1, 0, 0, 1, 0),
    va_overrides={5: -0.8},
    vb_overrides={2: 0.9},
)


def run_reference(
    reference: ReferenceRun,
    channel: ChannelConfig | None = None,
    classifier: ClassifierConfig | None = None,
) -> tuple[list[SessionTrace], KeyMaterial]:
    """Replay a pinned sequence on a noiseless channel."""
    return run_session(
        len(reference.bob_bits),
        channel=channel,
        noise=NoiseConfig(),
        variant=reference.variant,
        classifier=classifier,
        bob_bits=reference.bob_bits,
        alice_bits=reference.alice_bits,
        va_overrides=reference.va_overrides,
        vb_overrides=reference.vb_overrides,
    )
