"""Key distribution sequence checks, including the pinned ten-slot runs."""

import math

import numpy as np
import pytest

from okdsim.noise import NoiseConfig
from okdsim.protocol import (
    DUAL_REFERENCE,
    IDENTITY_REFERENCE,
    ChannelConfig,
    ClassifierConfig,
    ProtocolFaultError,
    ProtocolVariant,
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

TOL = 1e-12
CFG = ClassifierConfig()

# expected ten-slot records; v_a / v_b hold the exact value where an override
# was injected and the sign of the ideal +-1 reading everywhere else
DUAL_EXPECTED = {
    "x": (0, 0, 1, 0, 1, 1, 0, 1, 0, 1),
    "v_a": (1, 1, -1, 1, -1, -0.8, 1, -1, 1, -1),
    "y": (0, 0, 1, 0, 1, None, 0, 1, 0, 1),
    "z": (1, 0, 0, 1, 1, 1, 0, 0, 1, 0),
    "m_a": (0, 1, 0, 0, 1, None, 1, 0, 0, 0),
    "v_b": (1, -1, 0.9, 1, -1, -1, -1, 1, 1, 1),
    "m_b": (0, 1, None, 0, 1, 1, 1, 0, 0, 0),
    "final": (0, 1, None, 0, 1, None, 1, 0, 0, 0),
    "key": [0, 1, 0, 1, 1, 0, 0, 0],
}

IDENTITY_EXPECTED = {
    "x": (0, 0, 1, 0, 1, 1, 0, 1, 0, 0),
    "v_a": (1, 1, -1, 1, -1, -0.8, 1, -1, 1, 1),
    "y": (0, 0, 1, 0, 1, None, 0, 1, 0, 0),
    "z": (1, 0, 0, 1, 1, 1, 0, 0, 1, 0),
    "m_a": (None, 0, None, None, 1, None, 0, None, None, 0),
    "v_b": (1, -1, 0.9, 1, -1, -1, -1, 1, 1, -1),
    "m_b": (None, 0, None, None, 1, 1, 0, None, None, 0),
    "final": (None, 0, None, None, 1, None, 0, None, None, 0),
    "key": [0, 1, 0, 0],
}


def assert_reference_matches(reference, expected):
    traces, keys = run_reference(reference)
    assert len(traces) == 10
    for trace, x, v_a, y, z, m_a, v_b, m_b, final in zip(
        traces,
        expected["x"],
        expected["v_a"],
        expected["y"],
        expected["z"],
        expected["m_a"],
        expected["v_b"],
        expected["m_b"],
        expected["final"],
    ):
        assert trace.x == x and trace.z == z
        assert abs(trace.v_a - v_a) < TOL
        assert abs(trace.v_b - v_b) < TOL
        assert trace.y == y
        assert trace.m_a == m_a
        assert trace.m_b == m_b
        assert trace.final == final
        assert trace.psi1 == pytest.approx(math.pi * z)
    assert keys.final_bob == expected["key"]
    assert keys.final_alice == expected["key"]


def test_dual_reference_sequence():
    assert_reference_matches(DUAL_REFERENCE, DUAL_EXPECTED)


def test_identity_reference_sequence():
    assert_reference_matches(IDENTITY_REFERENCE, IDENTITY_EXPECTED)


def test_prepare_and_encode_draws():
    rng = np.random.default_rng(1)
    phases, bits = zip(*(bob_prepare(rng) for _ in range(10_000)))
    assert 0.45 < sum(bits) / len(bits) < 0.55
    assert all(phase == math.pi * bit for phase, bit in zip(phases, bits))
    phase, bit = alice_encode(np.random.default_rng(2))
    assert phase == math.pi * bit


def test_alice_measure_examples():
    assert alice_measure(1.0, CFG) == 0
    assert alice_measure(-1.0, CFG) == 1
    assert alice_measure(0.9, CFG) is None
    assert alice_measure(-0.8, CFG) is None


def test_alice_raw_key_tables():
    dual = ProtocolVariant.DUAL_RELATION
    identity = ProtocolVariant.IDENTITY_ONLY
    assert alice_raw_key(0, 0, dual) == 1
    assert alice_raw_key(0, 1, dual) == 0
    assert alice_raw_key(1, 0, dual) == 0
    assert alice_raw_key(1, 1, dual) == 1
    assert alice_raw_key(None, 1, dual) is None
    assert alice_raw_key(0, 0, identity) == 0
    assert alice_raw_key(1, 1, identity) == 1
    assert alice_raw_key(0, 1, identity) is None
    assert alice_raw_key(1, 0, identity) is None
    assert alice_raw_key(None, 0, identity) is None


def test_bob_raw_key_tables():
    dual = ProtocolVariant.DUAL_RELATION
    identity = ProtocolVariant.IDENTITY_ONLY
    assert bob_raw_key(-1.0, 0, CFG, dual) == 1
    assert bob_raw_key(1.0, 1, CFG, dual) == 0
    assert bob_raw_key(0.9, 0, CFG, dual) is None
    assert bob_raw_key(-1.0, 1, CFG, identity) == 1
    assert bob_raw_key(-1.0, 0, CFG, identity) == 0
    assert bob_raw_key(1.0, 1, CFG, identity) is None
    assert bob_raw_key(0.9, 1, CFG, identity) is None


def test_reconcile_drops_either_sides_discards():
    keys = reconcile([0, None, 1, 0], [0, 1, None, 0])
    assert keys.final_bob == [0, 0]
    assert keys.final_alice == [0, 0]
    with pytest.raises(ProtocolFaultError):
        reconcile([0, 1], [0])


def test_dual_session_has_no_sifting_loss():
    traces, keys = run_session(1000, classifier=ClassifierConfig(rng_seed=7))
    assert len(keys.final_bob) == 1000
    assert keys.final_bob == keys.final_alice
    assert all(trace.final is not None for trace in traces)
    assert all(trace.m_a == trace.m_b for trace in traces)
    for trace in traces:
        # identity slots land on -1, inversion slots on +1
        expected = -1.0 if trace.x == trace.z else 1.0
        assert abs(trace.v_b - expected) < TOL


def test_identity_session_keeps_about_half():
    _, keys = run_session(
        10_000,
        variant=ProtocolVariant.IDENTITY_ONLY,
        classifier=ClassifierConfig(rng_seed=7),
    )
    assert keys.final_bob == keys.final_alice
    assert 0.45 < len(keys.final_bob) / 10_000 < 0.55


def test_sessions_are_reproducible():
    kwargs = dict(
        noise=NoiseConfig(phase_drift_sigma=0.1, detector_noise_sigma=0.02, rng_seed=4),
        classifier=ClassifierConfig(rng_seed=21),
    )
    first, _ = run_session(200, **kwargs)
    second, _ = run_session(200, **kwargs)
    assert first == second
    third, _ = run_session(
        200,
        noise=NoiseConfig(phase_drift_sigma=0.1, detector_noise_sigma=0.02, rng_seed=5),
        classifier=ClassifierConfig(rng_seed=21),
    )
    assert first != third


def test_matched_controls_are_transparent():
    shifted, _ = run_session(
        100,
        channel=ChannelConfig(bob_control=1.1, alice_control=1.1),
        classifier=ClassifierConfig(rng_seed=3),
    )
    plain, _ = run_session(100, classifier=ClassifierConfig(rng_seed=3))
    for a, b in zip(shifted, plain):
        assert abs(a.v_b - b.v_b) < TOL
        assert a.final == b.final


def test_uncoordinated_mismatch_discards_everything():
    gap = 2.0 * math.pi / 5.0
    traces, keys = run_session(
        200,
        channel=ChannelConfig(bob_control=gap, alice_control=0.0, alice_knows_remote=False),
        variant=ProtocolVariant.IDENTITY_ONLY,
        classifier=ClassifierConfig(rng_seed=13),
    )
    for trace in traces:
        # raw bases put the address gap on the visibility; the slot parity
        # only flips its sign
        assert abs(abs(trace.v_b) - math.cos(gap)) < TOL
        if trace.x == trace.z:
            assert abs(trace.v_b - (-math.cos(gap))) < TOL
        assert trace.m_b is None
    assert keys.final_bob == []


def test_privacy_amplification():
    clean = reconcile([0, 1, 0, 1, 1, 0], [0, 1, 0, 1, 1, 0])
    rate, shortened = privacy_amplify(clean, 0.5, rng_seed=1)
    assert rate == 0.0
    assert len(shortened.final_bob) == 3
    broken = reconcile([0, 0, 0, 0], [1, 1, 1, 1])
    rate, _ = privacy_amplify(broken, 0.5, rng_seed=1)
    assert rate == 1.0
    empty = reconcile([None], [None])
    rate, kept = privacy_amplify(empty, 0.5, rng_seed=1)
    assert rate == 0.0 and kept.final_bob == []
    with pytest.raises(ValueError):
        privacy_amplify(clean, 0.0, rng_seed=1)


def test_accumulated_drift_shows_up_in_error_rate():
    _, keys = run_session(
        1000,
        noise=NoiseConfig(phase_drift_sigma=0.2, lock_interval=1000, rng_seed=5),
        classifier=ClassifierConfig(rng_seed=2),
    )
    rate, shortened = privacy_amplify(keys, 0.25, rng_seed=8)
    assert rate > 0.0
    assert len(shortened.final_bob) < len(keys.final_bob)


def test_run_session_rejects_empty_run():
    with pytest.raises(ValueError):
        run_session(0)
