"""Continuous-phase addressing for multi-party channels.

An address is a control-phase value in [0, pi]. A transmitter reaches a
receiver by dialing the receiver's control phase on its own control shifter
and pre-compensating its base phase by the same amount; a receiver that
shares the channel address applies the matching shift on its side. Two
addresses are distinguishable when their gap moves the round-trip visibility
off -1 by more than the classifier tolerance, which makes the usable pitch
arccos(1 - epsilon) and bounds how many addresses fit on [0, pi].
"""

import math
from dataclasses import dataclass, field
from enum import Enum

from .optics import TWO_PI


class CapacityExhaustedError(RuntimeError):
    """Raised when a registry has no free grid slot left."""


class Topology(Enum):
    POINT_TO_POINT = "point-to-point"
    ONE_TO_N = "one-to-n"
    N_TO_N = "n-to-n"


@dataclass(frozen=True)
class Address:
    control_phase: float  # radians in [0, pi]
    label: str


@dataclass
class AddressRegistry:
    topology: Topology
    resolution: float  # minimum control-phase gap between entries
    entries: list[Address] = field(default_factory=list)


def compensate_bob(phi1_base: float, address: Address) -> float:
    """Transmitter base phase with the destination control phase folded in."""
    return (phi1_base + address.control_phase) % TWO_PI


def compensate_alice(psi1_base: float, own_address: Address, knows_remote: bool) -> float:
    """Receiver base phase; shifted by its own control phase only when the
    channel address is shared with the transmitter."""
    if knows_remote:
        return (psi1_base + own_address.control_phase) % TWO_PI
    return psi1_base % TWO_PI


def address_matched(bob: Address, alice: Address, tolerance: float = 1e-9) -> bool:
    """True when the two control phases agree modulo 2*pi within tolerance."""
    gap = (alice.control_phase - bob.control_phase) % TWO_PI
    return min(gap, TWO_PI - gap) <= tolerance


def resolution_for_epsilon(epsilon: float) -> float:
    """Smallest detectable address gap at classifier tolerance epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    return math.acos(1.0 - epsilon)


def capacity(resolution: float) -> int:
    """Number of grid addresses with pitch ``resolution`` that fit on [0, pi]."""
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    # the nudge keeps exact-divisor pitches from losing a slot to rounding
    return int(math.floor(math.pi / resolution + 1e-9)) + 1


def allocate(registry: AddressRegistry, label: str) -> Address:
    """Hand out the next free grid address, packing from phase 0 upward."""
    limit = capacity(registry.resolution)
    if len(registry.entries) >= limit:
        raise CapacityExhaustedError(
            f"registry holds {limit} addresses at resolution {registry.resolution:.6g}"
        )
    address = Address(len(registry.entries) * registry.resolution, label)
    registry.entries.append(address)
    return address


def export_registry(registry: AddressRegistry) -> str:
    """Registry entries as a comma-separated table with a header row."""
    lines = ["label,control_phase"]
    for entry in registry.entries:
        lines.append(f"{entry.label},{entry.control_phase:.12g}")
    return "\n".join(lines) + "\n"


def import_registry(text: str, topology: Topology, resolution: float) -> AddressRegistry:
    """Rebuild a registry from the table format written by export_registry."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != "label,control_phase":
        raise ValueError("registry table must start with 'label,control_phase'")
    registry = AddressRegistry(topology, resolution)
    for line in lines[1:]:
        label, _, phase_text = line.partition(",")
        if not phase_text:
            raise ValueError(f"malformed registry row: {line!r}")
        registry.entries.append(Address(float(phase_text), label))
    return registry
