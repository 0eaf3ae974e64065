import json
import statistics

import numpy as np
import pytest

from qaes import bb84
from qaes.bb84 import Basis, ChannelConfig, Polarization
from qaes.channel import Transcript
from qaes.errors import EmptyInput, ExhaustionLimit, LengthMismatch, QberAbort


def channel_run(n, config, seed=0):
    """Prepare, transmit and measure n random pulses; return the batch and sifted bits."""
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, n)
    bases = rng.integers(0, 2, n)
    pulses = bb84.apply_channel(bb84.prepare_pulses(bits, bases), config, rng)
    rbases = rng.integers(0, 2, n)
    measured = pulses.with_measurement(rbases, bb84.measure_pulses(pulses, rbases, rng))
    a, b, kept = bb84.sift(bases, rbases, bits, measured.received_bit)
    return measured, a, b, kept


def test_encoding_table():
    assert Polarization.encode(0, Basis.RECTILINEAR) is Polarization.H
    assert Polarization.encode(1, Basis.RECTILINEAR) is Polarization.V
    assert Polarization.encode(0, Basis.DIAGONAL) is Polarization.LD
    assert Polarization.encode(1, Basis.DIAGONAL) is Polarization.RD
    for p in Polarization:
        assert Polarization.encode(p.bit, p.basis) is p


def test_prepare_pulses_records():
    batch = bb84.prepare_pulses([0, 1, 0, 1], [0, 0, 1, 1])
    assert batch.polarization_sent.tolist() == [0, 1, 2, 3]
    rec = batch[3]
    assert rec.polarization_sent is Polarization.RD
    assert rec.receiver_basis is None and rec.received_bit is None
    assert not rec.intercepted and not rec.disturbed_by_noise
    with pytest.raises(LengthMismatch):
        bb84.prepare_pulses([0, 1], [0])
    with pytest.raises(ValueError):
        bb84.prepare_pulses([2], [0])


def test_identity_channel():
    rng = np.random.default_rng(0)
    batch = bb84.prepare_pulses(rng.integers(0, 2, 1000), rng.integers(0, 2, 1000))
    out = bb84.apply_channel(batch, ChannelConfig(), rng)
    assert np.array_equal(out.polarization, batch.polarization_sent)
    assert not out.disturbed_by_noise.any() and not out.intercepted.any()


def test_matched_basis_reads_encoded_bit():
    measured, a, b, kept = channel_run(20_000, ChannelConfig())
    assert np.array_equal(a, b)
    # no sifted position comes from a basis mismatch
    assert np.array_equal(measured.sender_basis[kept], measured.receiver_basis[kept])


def test_sift_keeps_order():
    a, b, kept = bb84.sift([0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 1, 1], [1, 1, 0, 0])
    assert kept.tolist() == [0, 2]
    assert a.tolist() == [1, 1] and b.tolist() == [1, 0]
    with pytest.raises(LengthMismatch):
        bb84.sift([0], [0, 1], [0], [0])


def test_channel_statistics():
    n = 100_000
    _, a, b, _ = channel_run(n, ChannelConfig())
    assert abs(a.shape[0] / n - 0.5) < 0.01
    _, a, b, _ = channel_run(n, ChannelConfig(eve_enabled=True), seed=1)
    assert abs(np.mean(a != b) - 0.25) < 0.02
    for p in (0.05, 0.1, 0.3):
        measured, a, b, kept = channel_run(n, ChannelConfig(noise_level=p), seed=2)
        assert abs(np.mean(a != b) - p / 2) < 0.02
        assert abs(measured.disturbed_by_noise.mean() - p) < 0.01


def test_estimate_qber_sample_and_survivors():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 2, 1000).astype(np.uint8)
    b = a.copy()
    b[:100] ^= 1
    est = bb84.estimate_qber(a, b, 0.2, rng)
    assert est.sample_size == 200
    assert est.sender_bits.shape[0] == 800
    assert est.qber == est.errors / 200
    assert abs(est.qber - 0.1) < 0.06
    assert bb84.estimate_qber(a, b, 0.2, rng, min_sample=500).sample_size == 500
    with pytest.raises(EmptyInput):
        bb84.estimate_qber([], [], 0.2, rng)
    with pytest.raises(ValueError):
        bb84.estimate_qber(a, b, 1.0, rng)


def test_estimate_qber_intercept_resend():
    _, a, b, _ = channel_run(200_000, ChannelConfig(eve_enabled=True), seed=4)
    est = bb84.estimate_qber(a[:100_000], b[:100_000], 0.2, np.random.default_rng(0))
    assert abs(est.qber - 0.25) < 0.02


def test_min_sample_binomial_tail():
    k = bb84.min_sample_for(0.11, 0.99, 0.25)
    assert 30 < k < 80
    assert bb84.DEFAULT_MIN_SAMPLE <= k


def test_generate_key_clean_channel():
    pumped = []
    for seed in range(30):
        key = bb84.generate_key(128, ChannelConfig(rng_seed=seed))
        assert len(key) == 128
        assert key.agreed
        assert key.qber_estimate == 0.0
        assert len(key.to_bytes()) == 16
        pumped.append(key.pulses_pumped)
    assert abs(statistics.mean(pumped) / 320 - 1) < 0.15


def test_noise_raises_pulse_count():
    # small QBER samples occasionally exceed the threshold at noise 0.1; those sessions abort
    med = {}
    for noise in (0.0, 0.1):
        pumped, aborted = [], 0
        for s in range(20):
            try:
                pumped.append(bb84.generate_key(128, ChannelConfig(noise, False, s)).pulses_pumped)
            except QberAbort:
                aborted += 1
        assert aborted <= 4
        med[noise] = statistics.median(pumped)
    assert med[0.1] > med[0.0]


def test_fixed_budget_yield():
    bits = [len(bb84.run_pulses(500, ChannelConfig(0.05, False, s))) for s in range(20)]
    assert 180 <= statistics.median(bits) <= 220


def test_eve_aborts():
    for seed in range(20):
        with pytest.raises(QberAbort) as info:
            bb84.generate_key(128, ChannelConfig(eve_enabled=True, rng_seed=seed))
        assert info.value.qber > 0.11
        assert "QBER" in str(info.value)


def test_determinism():
    a = bb84.generate_key(256, ChannelConfig(0.02, False, 99))
    b = bb84.generate_key(256, ChannelConfig(0.02, False, 99))
    assert a.hex() == b.hex() and a.pulses_pumped == b.pulses_pumped
    c = bb84.generate_key(256, ChannelConfig(0.02, False, 100))
    assert c.hex() != a.hex()


def test_exhaustion_limit():
    with pytest.raises(ExhaustionLimit):
        bb84.generate_key(1024, ChannelConfig(), max_pulses=1000)


def test_transcript_messages():
    log = Transcript()
    bb84.generate_key(64, ChannelConfig(rng_seed=5), transcript=log)
    kinds = [r["kind"] for r in log.records]
    assert kinds[:5] == ["quantum", "bases", "bases", "sample", "verdict"]
    assert [r["seq"] for r in log.records] == list(range(len(kinds)))
    lines = log.dumps().splitlines()
    assert json.loads(lines[1])["payload"] == {"len": json.loads(lines[0])["payload"]["pulses"]}


def test_session_keeps_pulse_records():
    session = bb84.BB84Session(ChannelConfig(rng_seed=1), keep_pulses=True)
    session.run_batch(300)
    batch = session.batches[0]
    assert len(batch) == 300
    rec = batch[0]
    assert rec.receiver_basis in (Basis.RECTILINEAR, Basis.DIAGONAL)
    assert rec.received_bit in (0, 1)


def test_channel_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(noise_level=1.5)
    with pytest.raises(ValueError):
        ChannelConfig(rng_seed=-1)


def test_empty_pulses():
    assert len(bb84.prepare_pulses([], [])) == 0


def test_measurement_outcomes():
    rng = np.random.default_rng(12)
    n = 100_000
    h = bb84.prepare_pulses(np.zeros(n), np.zeros(n))
    assert not bb84.measure_pulses(h, np.zeros(n), rng).any()
    assert abs(bb84.measure_pulses(h, np.ones(n), rng).mean() - 0.5) < 0.01
    rd = bb84.prepare_pulses(np.ones(10), np.ones(10))
    assert bb84.measure_pulses(rd, np.ones(10), rng).all()
    with pytest.raises(LengthMismatch):
        bb84.measure_pulses(rd, np.ones(3), rng)
