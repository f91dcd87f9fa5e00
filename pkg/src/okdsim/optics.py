"""Transfer-matrix optics for a double phase-controlled Mach-Zehnder channel.

The channel is a pair of transmission lines threaded through two lossless
50:50 beam splitters, one at each party. Light rides the pair as a
two-component complex amplitude vector and every optical element is a 2x2
complex matrix acting on it.

Index convention, fixed across the whole package:

* index 0 ("upper") is the line whose phase stages apply the control
  phases, phi2 on the outbound stage and psi2 on the return stage;
* index 1 ("lower") is the line whose stages apply the base phases,
  phi1 outbound and psi1 on the return.

A slowly varying environment phase (``channel_offset``) is modeled on the
control line for the outbound stage and on the base line for the return
stage, so a one-way pass accumulates it once and a round trip twice.

All operators are unitary, hence total intensity is conserved. Intensities
are relative to a unit-amplitude source on the upper line.
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi


class UndefinedVisibilityError(ValueError):
    """Raised when both detector intensities vanish and visibility has no value."""


@dataclass(frozen=True)
class FieldPair:
    """Complex field amplitudes on the upper (index 0) and lower (index 1) lines."""

    upper: complex
    lower: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.upper, self.lower], dtype=complex)

    @classmethod
    def from_array(cls, vec: np.ndarray) -> "FieldPair":
        return cls(complex(vec[0]), complex(vec[1]))

    def total_intensity(self) -> float:
        return abs(self.upper) ** 2 + abs(self.lower) ** 2


#: Default source: unit amplitude injected on the upper line.
UNIT_INPUT = FieldPair(1.0 + 0.0j, 0.0j)


@dataclass(frozen=True)
class PhaseFrame:
    """Shifter settings for one slot.

    Bob drives the outbound stage (phi1 base, phi2 control), Alice drives the
    return stage (psi1 base, psi2 control). ``channel_offset`` is the
    uncontrolled relative phase between the two lines during the slot.
    """

    phi1: float
    phi2: float
    psi1: float
    psi2: float
    channel_offset: float = 0.0

    def reduced(self) -> "PhaseFrame":
        """Equivalent frame with every phase folded into [0, 2*pi)."""
        return PhaseFrame(
            self.phi1 % TWO_PI,
            self.phi2 % TWO_PI,
            self.psi1 % TWO_PI,
            self.psi2 % TWO_PI,
            self.channel_offset % TWO_PI,
        )


def beam_splitter() -> np.ndarray:
    """Lossless 50:50 splitter, (1/sqrt 2) [[1, i], [i, 1]]; reflection carries pi/2."""
    return np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=complex) / math.sqrt(2.0)


_BS = beam_splitter()


def phase_stage(upper_phase: float, lower_phase: float) -> np.ndarray:
    """diag(e^{i upper}, e^{i lower}); the upper row is the control-phase line."""
    return np.array(
        [[cmath.exp(1j * upper_phase), 0.0], [0.0, cmath.exp(1j * lower_phase)]],
        dtype=complex,
    )


def outbound_stage(frame: PhaseFrame) -> np.ndarray:
    """Bob's stage as seen after the outbound channel: control line carries the offset."""
    return phase_stage(frame.phi2 + frame.channel_offset, frame.phi1)


def return_stage(frame: PhaseFrame) -> np.ndarray:
    """Alice's stage as seen after the return channel: base line carries the offset."""
    return phase_stage(frame.psi2, frame.psi1 + frame.channel_offset)


def forward_mzi(frame: PhaseFrame) -> np.ndarray:
    """One-way interferometer: splitter, outbound stage, splitter."""
    return _BS @ outbound_stage(frame) @ _BS


def outbound_operator(frame: PhaseFrame) -> np.ndarray:
    """Source to the in-channel outbound pair (tap point before the far splitter)."""
    return outbound_stage(frame) @ _BS


def channel_operator(frame: PhaseFrame) -> np.ndarray:
    """Source to the in-channel return pair, after Alice's double splitter pass."""
    return return_stage(frame) @ _BS @ _BS @ outbound_stage(frame) @ _BS


def round_trip_operator(frame: PhaseFrame) -> np.ndarray:
    """Source back to Bob's detectors: the full six-element product."""
    return _BS @ channel_operator(frame)


def propagate(matrix: np.ndarray, fields: FieldPair) -> FieldPair:
    return FieldPair.from_array(matrix @ fields.as_array())


def channel_fields(frame: PhaseFrame, fields: FieldPair = UNIT_INPUT) -> FieldPair:
    """Return-pass fields inside the channel on their way back to Bob."""
    return propagate(channel_operator(frame), fields)


def round_trip(frame: PhaseFrame, fields: FieldPair = UNIT_INPUT) -> FieldPair:
    """Fields at Bob's two detectors after the full round trip."""
    return propagate(round_trip_operator(frame), fields)


# Closed matrix forms of the composites above. The library computes with the
# explicit products; these exist as an independent route and are pinned to the
# composed products by the test suite.

def forward_mzi_closed(frame: PhaseFrame) -> np.ndarray:
    """(1/2) [[a - b, i(a + b)], [i(a + b), -(a - b)]], a = e^{i(phi2+off)}, b = e^{i phi1}."""
    a = cmath.exp(1j * (frame.phi2 + frame.channel_offset))
    b = cmath.exp(1j * frame.phi1)
    return 0.5 * np.array([[a - b, 1j * (a + b)], [1j * (a + b), -(a - b)]], dtype=complex)


def _return_phases(frame: PhaseFrame) -> tuple[complex, complex]:
    # p rides the upper return line, q the lower; q picks up the offset twice.
    p = cmath.exp(1j * (frame.psi2 + frame.phi1))
    q = cmath.exp(1j * (frame.psi1 + frame.phi2 + 2.0 * frame.channel_offset))
    return p, q


def channel_operator_closed(frame: PhaseFrame) -> np.ndarray:
    """(1/sqrt 2) [[-p, i p], [i q, -q]] with p = e^{i(psi2+phi1)}, q = e^{i(psi1+phi2+2 off)}."""
    p, q = _return_phases(frame)
    return np.array([[-p, 1j * p], [1j * q, -q]], dtype=complex) / math.sqrt(2.0)


def round_trip_operator_closed(frame: PhaseFrame) -> np.ndarray:
    """(1/2) [[-(p + q), i(p - q)], [i(q - p), -(p + q)]] with p, q as above."""
    p, q = _return_phases(frame)
    return 0.5 * np.array(
        [[-(p + q), 1j * (p - q)], [1j * (q - p), -(p + q)]], dtype=complex
    )


def visibility(intensity_a: float, intensity_b: float) -> float:
    """Normalized detector imbalance (i_b - i_a) / (i_a + i_b)."""
    if intensity_a < 0.0 or intensity_b < 0.0:
        raise ValueError("intensities must be non-negative")
    total = intensity_a + intensity_b
    if total == 0.0:
        raise UndefinedVisibilityError("both detector intensities are zero")
    return (intensity_b - intensity_a) / total


def interference(fields: FieldPair) -> float:
    """Combined-line intensity |upper + lower|^2."""
    return abs(fields.upper + fields.lower) ** 2


class Classification(Enum):
    BIT0 = 0
    BIT1 = 1
    ERROR = 2


def classify_visibility(value: float, epsilon: float) -> Classification:
    """Map a visibility to a bit when it sits within epsilon of +1 or -1."""
    if abs(value - 1.0) <= epsilon:
        return Classification.BIT0
    if abs(value + 1.0) <= epsilon:
        return Classification.BIT1
    return Classification.ERROR


@dataclass(frozen=True)
class Detection:
    """One two-port detector reading with its derived quantities."""

    intensity_a: float
    intensity_b: float
    visibility: float
    interference: float
    classification: Classification


def measure(fields: FieldPair, epsilon: float) -> Detection:
    """Detect a field pair: port a is the upper line, port b the lower."""
    i_a = abs(fields.upper) ** 2
    i_b = abs(fields.lower) ** 2
    vis = visibility(i_a, i_b)
    return Detection(i_a, i_b, vis, interference(fields), classify_visibility(vis, epsilon))


def override_visibility(detection: Detection, value: float, epsilon: float) -> Detection:
    """Replace a reading's visibility (fault injection hook) and reclassify."""
    return Detection(
        detection.intensity_a,
        detection.intensity_b,
        value,
        detection.interference,
        classify_visibility(value, epsilon),
    )


# Scalar closed forms for the four sweep observables. Same status as the
# closed matrices: an independent route, pinned to the field computation.

def forward_visibility_closed(frame: PhaseFrame) -> float:
    """cos(phi2 + offset - phi1)."""
    return math.cos(frame.phi2 + frame.channel_offset - frame.phi1)


def forward_interference_closed(frame: PhaseFrame) -> float:
    """1 + sin(phi2 + offset - phi1)."""
    return 1.0 + math.sin(frame.phi2 + frame.channel_offset - frame.phi1)


def _return_mismatch(frame: PhaseFrame) -> float:
    return (
        frame.psi2
        + frame.phi1
        - frame.psi1
        - frame.phi2
        - 2.0 * frame.channel_offset
    )


def return_visibility_closed(frame: PhaseFrame) -> float:
    """-cos(psi2 + phi1 - psi1 - phi2 - 2 offset)."""
    return -math.cos(_return_mismatch(frame))


def inbound_interference_closed(frame: PhaseFrame) -> float:
    """1 - sin(psi2 + phi1 - psi1 - phi2 - 2 offset)."""
    return 1.0 - math.sin(_return_mismatch(frame))
