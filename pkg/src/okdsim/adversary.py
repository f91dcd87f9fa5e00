"""Eavesdropper models for the paired-line channel.

A tap is a passive, non-perturbing copy of the in-channel fields, taken on
the outbound pair after the transmitter's stage and on the return pair after
the receiver's stage. The stored observables (per-line intensities, the
combined-line interference, the tap visibility) are invariant under a key
flip by construction, which is the indistinguishability property the channel
relies on.

To do better than chance an eavesdropper must recombine the two tapped lines
through a splitter of her own. That recovers a full-contrast visibility only
relative to the tap point's line phase, which she does not know: her
ignorance is modeled as a uniformly random reference offset, redrawn once
per reset epoch. Thresholding the recombined visibility then matches the key
either exactly or exactly flipped within an epoch, so a run without resets
falls to one of the two global flip hypotheses, while per-epoch resets turn
the hypotheses into independent coin flips.
"""

import math
from dataclasses import dataclass
from enum import Enum
from collections.abc import Sequence

import numpy as np

from .optics import (
    FieldPair,
    PhaseFrame,
    UNIT_INPUT,
    beam_splitter,
    channel_operator,
    interference,
    outbound_operator,
    phase_stage,
    propagate,
    visibility,
)
from .protocol import SessionTrace

_BS = beam_splitter()


class GuessStrategy(Enum):
    RANDOM = "random"
    MAX_VISIBILITY = "max-visibility"


class ResetPolicy(Enum):
    NO_RESET = "no-reset"
    RANDOM_RESET = "random-reset"


@dataclass(frozen=True)
class TapReading:
    """Per-line intensities and derived quantities at one tap point."""

    intensity_upper: float
    intensity_lower: float
    visibility: float
    interference: float


@dataclass(frozen=True)
class TapRecord:
    slot_index: int
    outbound: TapReading
    inbound: TapReading
    outbound_fields: FieldPair
    inbound_fields: FieldPair
    key_bit: int  # ground truth kept for scoring, never read by a strategy


@dataclass(frozen=True)
class AttackOutcome:
    guessed_bits: tuple[int, ...]
    true_bits: tuple[int, ...]
    success_rate: float
    mutual_information_estimate: float  # bits per slot, plug-in estimate


def _reading(fields: FieldPair) -> TapReading:
    i_upper = abs(fields.upper) ** 2
    i_lower = abs(fields.lower) ** 2
    return TapReading(i_upper, i_lower, visibility(i_upper, i_lower), interference(fields))


def tap_channel(
    frame: PhaseFrame,
    fields: FieldPair = UNIT_INPUT,
    slot_index: int = 0,
    key_bit: int = 0,
) -> TapRecord:
    """Copy both channel passes of one slot without touching the light."""
    outbound = propagate(outbound_operator(frame), fields)
    inbound = propagate(channel_operator(frame), fields)
    return TapRecord(slot_index, _reading(outbound), _reading(inbound), outbound, inbound, key_bit)


def tap_session(traces: Sequence[SessionTrace]) -> list[TapRecord]:
    """Tap every slot of a finished session from its recorded frames."""
    return [tap_channel(t.frame, UNIT_INPUT, t.slot_index, t.x) for t in traces]


def plugin_mutual_information(xs: Sequence[int], ys: Sequence[int]) -> float:
    """Empirical mutual information in bits between two binary sequences."""
    if len(xs) != len(ys) or not xs:
        raise ValueError("sequences must be non-empty and equally long")
    n = len(xs)
    joint = np.zeros((2, 2))
    for a, b in zip(xs, ys):
        joint[a, b] += 1.0
    joint /= n
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    info = 0.0
    for a in (0, 1):
        for b in (0, 1):
            p = joint[a, b]
            if p > 0.0:
                info += p * math.log2(p / (px[a] * py[b]))
    return info


def _reference_offsets(
    n: int, epoch_length: int, rng: np.random.Generator, oracle: bool
) -> np.ndarray:
    """One reference phase per slot, constant within each reset epoch."""
    if epoch_length < 1:
        raise ValueError("epoch_length must be at least 1")
    if oracle:
        return np.zeros(n)
    n_epochs = (n + epoch_length - 1) // epoch_length
    draws = rng.uniform(0.0, 2.0 * math.pi, n_epochs)
    return np.repeat(draws, epoch_length)[:n]


def _recombined_visibility(fields: FieldPair, reference_offset: float) -> float:
    recombiner = _BS @ phase_stage(0.0, reference_offset)
    out = propagate(recombiner, fields)
    return visibility(abs(out.upper) ** 2, abs(out.lower) ** 2)


def _decode_bits(
    records: Sequence[TapRecord], offsets: np.ndarray
) -> tuple[int, ...]:
    return tuple(
        0 if _recombined_visibility(r.outbound_fields, offsets[i]) >= 0.0 else 1
        for i, r in enumerate(records)
    )


def eve_guess(
    records: Sequence[TapRecord],
    strategy: GuessStrategy,
    *,
    rng_seed: int = 0,
    epoch_length: int = 1,
    reference_oracle: bool = False,
) -> AttackOutcome:
    """Guess the key one slot at a time.

    RANDOM flips a fair coin per slot. MAX_VISIBILITY recombines the tapped
    outbound lines through the eavesdropper's own splitter and thresholds the
    result; ``reference_oracle`` grants her the true line phase (a sanity
    ceiling, not an achievable attack).
    """
    if not records:
        raise ValueError("no tap records to attack")
    rng = np.random.default_rng(rng_seed)
    truth = tuple(r.key_bit for r in records)
    if strategy is GuessStrategy.RANDOM:
        guesses = tuple(int(b) for b in rng.integers(0, 2, len(records)))
    else:
        offsets = _reference_offsets(len(records), epoch_length, rng, reference_oracle)
        guesses = _decode_bits(records, offsets)
    hits = sum(g == t for g, t in zip(guesses, truth))
    return AttackOutcome(
        guesses,
        truth,
        hits / len(records),
        plugin_mutual_information(guesses, truth),
    )


def offline_flip_attack(
    records: Sequence[TapRecord],
    reset_policy: ResetPolicy,
    *,
    rng_seed: int = 0,
    epoch_length: int = 1,
) -> AttackOutcome:
    """Decode the whole record, then pick the better of the two global flip
    hypotheses (decoded as-is, or every bit flipped).

    Without resets the reference holds for the whole run, so one hypothesis
    recovers the key outright. Per-epoch resets decorrelate the epochs and
    pin both hypotheses near chance.
    """
    if not records:
        raise ValueError("no tap records to attack")
    rng = np.random.default_rng(rng_seed)
    span = len(records) if reset_policy is ResetPolicy.NO_RESET else epoch_length
    offsets = _reference_offsets(len(records), span, rng, oracle=False)
    decoded = _decode_bits(records, offsets)
    flipped = tuple(1 - b for b in decoded)
    truth = tuple(r.key_bit for r in records)
    score_plain = sum(g == t for g, t in zip(decoded, truth)) / len(records)
    score_flipped = 1.0 - score_plain
    guesses, score = (
        (decoded, score_plain) if score_plain >= score_flipped else (flipped, score_flipped)
    )
    return AttackOutcome(guesses, truth, score, plugin_mutual_information(guesses, truth))
