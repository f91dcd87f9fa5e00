"""Channel phase drift and detector noise models.

Phase drift is a Gaussian random walk on the relative line phase, zeroed by
an active lock every ``lock_interval`` slots. Locking removes accumulation
but cannot pre-correct the current slot, so each slot keeps its own fresh
increment even under continuous locking.
"""

from dataclasses import dataclass

import numpy as np

from .optics import Detection, classify_visibility, visibility

LIGHT_SPEED = 2.99792458e8  # vacuum, m/s


@dataclass(frozen=True)
class NoiseConfig:
    phase_drift_sigma: float = 0.0  # radians per slot
    detector_noise_sigma: float = 0.0  # intensity units
    lock_interval: int = 1  # slots between phase-lock resets, 0 locks continuously
    rng_seed: int = 0


def drift_process(cfg: NoiseConfig, n_slots: int) -> np.ndarray:
    """Per-slot channel offsets for a run.

    The walk restarts at zero at the top of every lock window. The standard
    normal draws depend only on the seed and the slot count, so scaling the
    sigma rescales every offset without reshuffling the sample path.
    """
    if n_slots < 0:
        raise ValueError("n_slots must be non-negative")
    rng = np.random.default_rng(cfg.rng_seed)
    increments = rng.standard_normal(n_slots)
    period = cfg.lock_interval if cfg.lock_interval > 0 else 1
    offsets = np.empty(n_slots)
    walk = 0.0
    for i in range(n_slots):
        if i % period == 0:
            walk = 0.0
        walk += cfg.phase_drift_sigma * increments[i]
        offsets[i] = walk
    return offsets


def perturb_detection(
    detection: Detection,
    cfg: NoiseConfig,
    rng: np.random.Generator,
    epsilon: float,
) -> Detection:
    """Add Gaussian detector noise to each reading and rederive the record.

    Intensities clamp at zero. The combined-line reading is a detector output
    of its own, so it receives an independent draw rather than a recompute.
    A fully dark pair reads as visibility 0, which classifies as an error.
    """
    sigma = cfg.detector_noise_sigma
    if sigma == 0.0:
        return detection
    i_a = max(0.0, detection.intensity_a + sigma * rng.standard_normal())
    i_b = max(0.0, detection.intensity_b + sigma * rng.standard_normal())
    combined = max(0.0, detection.interference + sigma * rng.standard_normal())
    vis = 0.0 if i_a + i_b == 0.0 else visibility(i_a, i_b)
    return Detection(i_a, i_b, vis, combined, classify_visibility(vis, epsilon))


def coherence_length(bit_rate: float) -> float:
    """Coherence length in meters for a source spanning one bit period."""
    if bit_rate <= 0.0:
        raise ValueError("bit_rate must be positive")
    return LIGHT_SPEED / bit_rate
