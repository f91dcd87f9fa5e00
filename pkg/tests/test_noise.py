"""Phase drift, detector noise, and coherence length checks."""

import math

import numpy as np
import pytest

from okdsim.noise import (
    LIGHT_SPEED,
    NoiseConfig,
    coherence_length,
    drift_process,
    perturb_detection,
)
from okdsim.optics import (
    Classification,
    PhaseFrame,
    UNIT_INPUT,
    forward_mzi,
    measure,
    propagate,
)


def oracle_drift(sigma: float, lock: int, seed: int, n: int) -> np.ndarray:
    steps = sigma * np.random.default_rng(seed).standard_normal(n)
    period = lock if lock > 0 else 1
    out = np.empty(n)
    walk = 0.0
    for i in range(n):
        if i % period == 0:
            walk = 0.0
        walk += steps[i]
        out[i] = walk
    return out


def test_zero_sigma_is_silent():
    offsets = drift_process(NoiseConfig(), 500)
    assert offsets.shape == (500,)
    assert not offsets.any()


def test_per_slot_locking_leaves_bare_increments():
    cfg = NoiseConfig(phase_drift_sigma=0.02, lock_interval=1, rng_seed=9)
    offsets = drift_process(cfg, 1000)
    steps = 0.02 * np.random.default_rng(9).standard_normal(1000)
    assert np.allclose(offsets, steps, atol=1e-15)


def test_walk_accumulates_between_locks():
    cfg = NoiseConfig(phase_drift_sigma=0.05, lock_interval=100, rng_seed=9)
    offsets = drift_process(cfg, 1000)
    assert np.allclose(offsets, oracle_drift(0.05, 100, 9, 1000), atol=1e-15)
    # the walk restarts at every lock slot, so each window begins small
    window_starts = offsets[::100]
    window_ends = offsets[99::100]
    assert np.mean(np.abs(window_ends)) > np.mean(np.abs(window_starts))


def test_unlocked_interval_behaves_like_every_slot():
    a = drift_process(NoiseConfig(phase_drift_sigma=0.1, lock_interval=0, rng_seed=3), 64)
    b = drift_process(NoiseConfig(phase_drift_sigma=0.1, lock_interval=1, rng_seed=3), 64)
    assert np.array_equal(a, b)


def test_drift_is_reproducible():
    cfg = NoiseConfig(phase_drift_sigma=0.3, lock_interval=25, rng_seed=77)
    assert np.array_equal(drift_process(cfg, 400), drift_process(cfg, 400))


def _sample_detection() -> "Detection":
    frame = PhaseFrame(phi1=0.0, phi2=0.0, psi1=0.0, psi2=0.0)
    return measure(propagate(forward_mzi(frame), UNIT_INPUT), 0.05)


def test_zero_detector_sigma_returns_same_object():
    detection = _sample_detection()
    rng = np.random.default_rng(0)
    assert perturb_detection(detection, NoiseConfig(), rng, 0.05) is detection


def test_perturbed_detection_stays_consistent():
    detection = _sample_detection()
    cfg = NoiseConfig(detector_noise_sigma=0.05)
    rng = np.random.default_rng(123)
    noisy = perturb_detection(detection, cfg, rng, 0.05)
    assert noisy.intensity_a >= 0.0 and noisy.intensity_b >= 0.0
    assert noisy.interference >= 0.0
    total = noisy.intensity_a + noisy.intensity_b
    expected = (noisy.intensity_b - noisy.intensity_a) / total
    assert abs(noisy.visibility - expected) < 1e-12
    assert noisy.classification in Classification


def test_large_noise_clamps_and_mostly_misclassifies():
    detection = _sample_detection()
    cfg = NoiseConfig(detector_noise_sigma=50.0)
    rng = np.random.default_rng(6)
    outcomes = {kind: 0 for kind in Classification}
    for _ in range(500):
        noisy = perturb_detection(detection, cfg, rng, 0.05)
        assert noisy.intensity_a >= 0.0
        assert noisy.intensity_b >= 0.0
        assert noisy.interference >= 0.0
        assert -1.0 <= noisy.visibility <= 1.0
        outcomes[noisy.classification] += 1
    # the true bit is 0; overwhelming noise makes discards frequent and the
    # surviving classifications carry no key information
    assert outcomes[Classification.ERROR] / 500 > 0.3
    assert outcomes[Classification.BIT1] > 50


def test_zero_noise_session_is_transparent():
    from okdsim.protocol import run_session

    plain, _ = run_session(100)
    quiet, _ = run_session(100, noise=NoiseConfig(lock_interval=17, rng_seed=99))
    assert plain == quiet


def test_coherence_length_examples():
    value = coherence_length(1e10)
    assert value == LIGHT_SPEED / 1e10
    assert abs(value - 0.02998) / 0.02998 < 1e-3
    assert coherence_length(1e9) == pytest.approx(0.3, rel=1e-3)
    assert coherence_length(3e8) == pytest.approx(1.0, rel=1e-2)
    with pytest.raises(ValueError):
        coherence_length(0.0)
