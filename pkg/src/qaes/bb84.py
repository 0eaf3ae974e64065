"""BB84 key distribution between two simulated parties.

Pulses are handled as numpy arrays (one entry per photon); ``PulseBatch``
gives a per-photon ``PulseRecord`` view when needed. Polarizations are
encoded as ``2 * basis + bit`` so H, V, LD, RD = 0, 1, 2, 3.

Post-processing is minimal: sifting, a public sample of the sifted key to
estimate the QBER, and a shortening of the survivors by the estimated error
count. There is no error correction, so with channel noise the two parties'
keys may still differ in a few positions.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from qaes.channel import ClassicalChannel, Transcript
from qaes.errors import EmptyInput, ExhaustionLimit, LengthMismatch, QberAbort

DEFAULT_SACRIFICE = 0.2
DEFAULT_ABORT_THRESHOLD = 0.11
DEFAULT_MIN_SAMPLE = 44
DEFAULT_MAX_PULSES = 10_000_000


class Basis(enum.IntEnum):
    RECTILINEAR = 0
    DIAGONAL = 1


class Polarization(enum.IntEnum):
    H = 0
    V = 1
    LD = 2
    RD = 3

    @property
    def basis(self) -> Basis:
        return Basis(self >> 1)

    @property
    def bit(self) -> int:
        return int(self) & 1

    @classmethod
    def encode(cls, bit: int, basis: Basis | int) -> Polarization:
        return cls(2 * int(basis) + int(bit))


@dataclass(frozen=True)
class ChannelConfig:
    noise_level: float = 0.0
    eve_enabled: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.noise_level <= 1.0:
            raise ValueError(f"noise_level must lie in [0, 1], got {self.noise_level}")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class PulseRecord:
    sender_bit: int
    sender_basis: Basis
    polarization_sent: Polarization
    disturbed_by_noise: bool
    intercepted: bool
    receiver_basis: Basis | None
    received_bit: int | None


def _u8(values) -> np.ndarray:
    return np.asarray(values, dtype=np.uint8).ravel()


@dataclass(frozen=True)
class PulseBatch:
    """Column-oriented store of PulseRecords.

    ``polarization`` is the state currently in flight; it equals
    ``polarization_sent`` until the channel disturbs it. ``receiver_basis``
    and ``received_bit`` hold -1 until the pulses are measured.
    """

    sender_bit: np.ndarray
    sender_basis: np.ndarray
    polarization_sent: np.ndarray
    polarization: np.ndarray
    disturbed_by_noise: np.ndarray
    intercepted: np.ndarray
    receiver_basis: np.ndarray
    received_bit: np.ndarray

    def __len__(self):
        return self.sender_bit.shape[0]

    def __getitem__(self, i: int) -> PulseRecord:
        rb = int(self.receiver_basis[i])
        bit = int(self.received_bit[i])
        return PulseRecord(
            sender_bit=int(self.sender_bit[i]),
            sender_basis=Basis(int(self.sender_basis[i])),
            polarization_sent=Polarization(int(self.polarization_sent[i])),
            disturbed_by_noise=bool(self.disturbed_by_noise[i]),
            intercepted=bool(self.intercepted[i]),
            receiver_basis=None if rb < 0 else Basis(rb),
            received_bit=None if bit < 0 else bit,
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def with_measurement(self, bases, bits) -> PulseBatch:
        return replace(
            self,
            receiver_basis=np.asarray(bases, dtype=np.int8),
            received_bit=np.asarray(bits, dtype=np.int8),
        )


def prepare_pulses(bits, bases) -> PulseBatch:
    """Encode sender bits in the chosen bases (0/1 -> H/V or LD/RD)."""
    bits = _u8(bits)
    bases = _u8(bases)
    if bits.shape != bases.shape:
        raise LengthMismatch(f"{bits.shape[0]} bits but {bases.shape[0]} bases")
    if bits.size and (bits.max() > 1 or bases.max() > 1):
        raise ValueError("bits and bases must be 0 or 1")
    pol = (2 * bases + bits).astype(np.uint8)
    n = bits.shape[0]
    return PulseBatch(
        sender_bit=bits,
        sender_basis=bases,
        polarization_sent=pol,
        polarization=pol.copy(),
        disturbed_by_noise=np.zeros(n, dtype=bool),
        intercepted=np.zeros(n, dtype=bool),
        receiver_basis=np.full(n, -1, dtype=np.int8),
        received_bit=np.full(n, -1, dtype=np.int8),
    )


def _measure(pol: np.ndarray, bases: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # a matching basis reads the encoded bit; a mismatched one yields a fair coin
    coins = rng.integers(0, 2, size=pol.shape[0], dtype=np.uint8)
    match = (pol >> 1) == bases
    return np.where(match, pol & 1, coins).astype(np.uint8)


def apply_channel(pulses: PulseBatch, config: ChannelConfig, rng: np.random.Generator) -> PulseBatch:
    """Send pulses through the quantum channel.

    With ``eve_enabled`` every pulse is intercepted, measured in a random
    basis and resent in the collapsed state. Independently, each pulse is
    depolarized with probability ``noise_level`` (redrawn uniformly from the
    four states).
    """
    n = len(pulses)
    pol = pulses.polarization.copy()
    intercepted = pulses.intercepted.copy()
    if config.eve_enabled:
        eve_bases = rng.integers(0, 2, size=n, dtype=np.uint8)
        eve_bits = _measure(pol, eve_bases, rng)
        pol = (2 * eve_bases + eve_bits).astype(np.uint8)
        intercepted[:] = True
    disturbed = pulses.disturbed_by_noise.copy()
    if config.noise_level > 0:
        hit = rng.random(n) < config.noise_level
        redraw = rng.integers(0, 4, size=n, dtype=np.uint8)
        pol = np.where(hit, redraw, pol).astype(np.uint8)
        disturbed |= hit
    return replace(pulses, polarization=pol, disturbed_by_noise=disturbed, intercepted=intercepted)


def measure_pulses(pulses: PulseBatch, bases, rng: np.random.Generator) -> np.ndarray:
    bases = _u8(bases)
    if bases.shape[0] != len(pulses):
        raise LengthMismatch(f"{len(pulses)} pulses but {bases.shape[0]} bases")
    return _measure(pulses.polarization, bases, rng)


def sift(sender_bases, receiver_bases, sender_bits, receiver_bits):
    """Keep positions where the two bases agree.

    Returns ``(sender_bits, receiver_bits, kept_indices)``, order preserved.
    """
    arrays = [_u8(a) for a in (sender_bases, receiver_bases, sender_bits, receiver_bits)]
    if len({a.shape[0] for a in arrays}) != 1:
        raise LengthMismatch("sift inputs must all have the same length")
    sb, rb, sbits, rbits = arrays
    kept = np.flatnonzero(sb == rb)
    return sbits[kept], rbits[kept], kept


class QberEstimate(NamedTuple):
    qber: float
    sender_bits: np.ndarray
    receiver_bits: np.ndarray
    sample_size: int
    errors: int


def sample_size_for(n: int, sacrifice_fraction: float, min_sample: int = 0) -> int:
    k = max(int(round(sacrifice_fraction * n)), min_sample, 1)
    return min(k, n)


def estimate_qber(sender_bits, receiver_bits, sacrifice_fraction: float,
                  rng: np.random.Generator, min_sample: int = 0) -> QberEstimate:
    """Publicly compare a random sample of the sifted key and discard it.

    The sample is ``sacrifice_fraction`` of the positions, raised to
    ``min_sample`` when that is larger. Survivors keep their order.
    """
    a = _u8(sender_bits)
    b = _u8(receiver_bits)
    if a.shape != b.shape:
        raise LengthMismatch("sifted sequences must be aligned")
    if a.size == 0:
        raise EmptyInput("no sifted bits to sample")
    if not 0.0 < sacrifice_fraction < 1.0:
        raise ValueError("sacrifice_fraction must lie strictly between 0 and 1")
    k = sample_size_for(a.shape[0], sacrifice_fraction, min_sample)
    sample = rng.choice(a.shape[0], size=k, replace=False)
    errors = int(np.count_nonzero(a[sample] != b[sample]))
    keep = np.ones(a.shape[0], dtype=bool)
    keep[sample] = False
    return QberEstimate(errors / k, a[keep], b[keep], k, errors)


def min_sample_for(threshold: float = DEFAULT_ABORT_THRESHOLD, confidence: float = 0.99,
                   attack_qber: float = 0.25, limit: int = 2_000) -> int:
    """Smallest sample size from which an intercept-resend attacker passes the
    ``threshold`` check with probability below ``1 - confidence`` at every
    larger size (exact binomial tail)."""
    def escape(k):
        allowed = math.floor(threshold * k + 1e-12)
        lp, lq = math.log(attack_qber), math.log1p(-attack_qber)
        return sum(
            math.exp(math.lgamma(k + 1) - math.lgamma(j + 1) - math.lgamma(k - j + 1)
                     + j * lp + (k - j) * lq)
            for j in range(allowed + 1)
        )

    best = None
    for k in range(limit, 0, -1):
        if escape(k) >= 1 - confidence:
            return best if best is not None else k + 1
        best = k
    return 1


@dataclass(frozen=True)
class QuantumKey:
    """Result of a BB84 session.

    ``bits`` is the sender's key, ``receiver_bits`` the receiver's copy (equal
    to ``bits`` on a clean channel). ``generation_time`` is wall-clock seconds
    spent in the session (T_qkg).
    """

    bits: np.ndarray
    receiver_bits: np.ndarray
    qber_estimate: float
    pulses_pumped: int
    generation_time: float
    sifted_bits: int = 0
    sample_size: int = 0

    def __len__(self):
        return self.bits.shape[0]

    @property
    def agreed(self) -> bool:
        return bool(np.array_equal(self.bits, self.receiver_bits))

    def to_bytes(self, receiver: bool = False) -> bytes:
        bits = self.receiver_bits if receiver else self.bits
        if bits.shape[0] % 8:
            raise ValueError("key length is not a whole number of bytes")
        return np.packbits(bits).tobytes()

    def hex(self, receiver: bool = False) -> str:
        return self.to_bytes(receiver).hex()


def party_rngs(seed: int) -> list[np.random.Generator]:
    """Independent generators for sender, receiver and channel."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]


class Sender:
    """Alice: prepares pulses, answers basis announcements, picks the QBER sample."""

    def __init__(self, endpoint, rng: np.random.Generator):
        self.ep = endpoint
        self.rng = rng
        self.key: list[np.ndarray] = []
        self._bits = self._bases = None
        self._sifted = None

    def emit(self, n: int) -> PulseBatch:
        self._bits = self.rng.integers(0, 2, size=n, dtype=np.uint8)
        self._bases = self.rng.integers(0, 2, size=n, dtype=np.uint8)
        return prepare_pulses(self._bits, self._bases)

    def answer_bases(self) -> None:
        their = self.ep.recv("bases").payload
        self.ep.send("bases", self._bases)
        keep = np.flatnonzero(self._bases == their)
        self._sifted = self._bits[keep]

    def choose_sample(self, sacrifice_fraction: float, min_sample: int) -> None:
        n = self._sifted.shape[0]
        if n == 0:
            self.ep.send("sample", {"indices": np.empty(0, dtype=np.int64), "bits": self._sifted})
            return
        k = sample_size_for(n, sacrifice_fraction, min_sample)
        idx = np.sort(self.rng.choice(n, size=k, replace=False))
        self.ep.send("sample", {"indices": idx, "bits": self._sifted[idx]})
        self._sample = idx

    def finish(self) -> dict:
        verdict = self.ep.recv("verdict").payload
        if verdict["abort"]:
            return verdict
        keep = np.ones(self._sifted.shape[0], dtype=bool)
        if self._sifted.shape[0]:
            keep[self._sample] = False
        survivors = self._sifted[keep]
        self.key.append(survivors[: survivors.shape[0] - verdict["shorten"]])
        return verdict


class Receiver:
    """Bob: measures in random bases, announces them, judges the QBER sample."""

    def __init__(self, endpoint, rng: np.random.Generator):
        self.ep = endpoint
        self.rng = rng
        self.key: list[np.ndarray] = []
        self.errors = 0
        self.sampled = 0
        self.sifted = 0

    def receive(self, pulses: PulseBatch) -> PulseBatch:
        self._bases = self.rng.integers(0, 2, size=len(pulses), dtype=np.uint8)
        self._bits = measure_pulses(pulses, self._bases, self.rng)
        self.ep.send("bases", self._bases)
        return pulses.with_measurement(self._bases, self._bits)

    def compare_bases(self) -> None:
        theirs = self.ep.recv("bases").payload
        keep = np.flatnonzero(self._bases == theirs)
        self._kept = keep
        self._sifted = self._bits[keep]
        self.sifted += keep.shape[0]

    def judge(self, threshold: float) -> None:
        msg = self.ep.recv("sample").payload
        idx, their_bits = msg["indices"], msg["bits"]
        errors = int(np.count_nonzero(self._sifted[idx] != their_bits))
        self.errors += errors
        self.sampled += idx.shape[0]
        cumulative = self.errors / self.sampled if self.sampled else 0.0
        batch_qber = errors / idx.shape[0] if idx.shape[0] else 0.0
        keep = np.ones(self._sifted.shape[0], dtype=bool)
        keep[idx] = False
        survivors = self._sifted[keep]
        shorten = min(survivors.shape[0], math.ceil(batch_qber * survivors.shape[0]))
        verdict = {
            "abort": cumulative > threshold,
            "qber": cumulative,
            "batch_qber": batch_qber,
            "shorten": shorten,
        }
        self.ep.send("verdict", verdict)
        if not verdict["abort"]:
            self.key.append(survivors[: survivors.shape[0] - shorten])


@dataclass
class BB84Session:
    """One key-agreement session; batches share the running QBER tally.

    The reference scheduler interleaves the two parties' steps in a single
    thread. Each batch: sender emits, the channel acts, receiver measures and
    announces bases, sender replies with its bases, both sift, sender reveals
    a random sample, receiver returns the verdict, both keep the survivors.
    """

    config: ChannelConfig
    sacrifice_fraction: float = DEFAULT_SACRIFICE
    abort_threshold: float = DEFAULT_ABORT_THRESHOLD
    min_sample: int = DEFAULT_MIN_SAMPLE
    transcript: Transcript | None = None
    pulses_pumped: int = 0
    batches: list[PulseBatch] = field(default_factory=list)
    keep_pulses: bool = False

    def __post_init__(self):
        if not 0.0 < self.sacrifice_fraction < 1.0:
            raise ValueError("sacrifice_fraction must lie strictly between 0 and 1")
        self.channel = ClassicalChannel("alice", "bob", self.transcript)
        a_rng, b_rng, self._channel_rng = party_rngs(self.config.rng_seed)
        self.sender = Sender(self.channel.endpoint("alice"), a_rng)
        self.receiver = Receiver(self.channel.endpoint("bob"), b_rng)
        self._sample_floor = self.min_sample

    @property
    def key_length(self) -> int:
        return sum(k.shape[0] for k in self.receiver.key)

    @property
    def qber(self) -> float:
        r = self.receiver
        return r.errors / r.sampled if r.sampled else 0.0

    def run_batch(self, n_pulses: int) -> dict:
        if self.transcript is not None:
            self.transcript.log("alice->bob", "quantum", {"pulses": n_pulses})
        pulses = self.sender.emit(n_pulses)
        pulses = apply_channel(pulses, self.config, self._channel_rng)
        measured = self.receiver.receive(pulses)
        if self.keep_pulses:
            self.batches.append(measured)
        self.pulses_pumped += n_pulses
        self.sender.answer_bases()
        self.receiver.compare_bases()
        # the minimum sample applies to the session as a whole
        floor = max(self._sample_floor - self.receiver.sampled, 0)
        self.sender.choose_sample(self.sacrifice_fraction, floor)
        self.receiver.judge(self.abort_threshold)
        verdict = self.sender.finish()
        if verdict["abort"]:
            raise QberAbort(verdict["qber"], self.abort_threshold, self.pulses_pumped)
        return verdict

    def result(self, elapsed: float, target: int | None = None) -> QuantumKey:
        a = np.concatenate(self.sender.key) if self.sender.key else np.empty(0, np.uint8)
        b = np.concatenate(self.receiver.key) if self.receiver.key else np.empty(0, np.uint8)
        if target is not None:
            a, b = a[:target], b[:target]
        return QuantumKey(
            bits=a,
            receiver_bits=b,
            qber_estimate=self.qber,
            pulses_pumped=self.pulses_pumped,
            generation_time=elapsed,
            sifted_bits=self.receiver.sifted,
            sample_size=self.receiver.sampled,
        )


def expected_yield(sacrifice_fraction: float = DEFAULT_SACRIFICE) -> float:
    """Surviving key bits per pulse on a clean channel."""
    return 0.5 * (1.0 - sacrifice_fraction)


def generate_key(
    target_bits: int,
    config: ChannelConfig,
    sacrifice_fraction: float = DEFAULT_SACRIFICE,
    abort_threshold: float = DEFAULT_ABORT_THRESHOLD,
    min_sample: int = DEFAULT_MIN_SAMPLE,
    max_pulses: int = DEFAULT_MAX_PULSES,
    transcript: Transcript | None = None,
) -> QuantumKey:
    """Pump pulses in batches until ``target_bits`` survive post-processing.

    Each batch is sized from the bits still missing and the clean-channel
    yield; the first batch also covers the minimum QBER sample. Raises
    QberAbort as soon as the running QBER exceeds ``abort_threshold`` and
    ExhaustionLimit once ``max_pulses`` would be exceeded.
    """
    if target_bits <= 0:
        raise ValueError("target_bits must be positive")
    start = time.perf_counter()
    session = BB84Session(config, sacrifice_fraction, abort_threshold, min_sample, transcript)
    rate = expected_yield(sacrifice_fraction)
    while session.key_length < target_bits:
        missing = target_bits - session.key_length
        if session.pulses_pumped == 0:
            # sifted bits needed so that the sample floor still leaves `missing`
            sifted = max(missing / (1.0 - sacrifice_fraction), missing + min_sample)
            n = math.ceil(2.0 * sifted)
        else:
            n = max(math.ceil(missing / rate), 16)
        if session.pulses_pumped + n > max_pulses:
            raise ExhaustionLimit(
                f"pulse budget {max_pulses} exhausted with {session.key_length}/{target_bits} bits"
            )
        session.run_batch(n)
    return session.result(time.perf_counter() - start, target_bits)


def run_pulses(
    n_pulses: int,
    config: ChannelConfig,
    sacrifice_fraction: float = DEFAULT_SACRIFICE,
    abort_threshold: float = DEFAULT_ABORT_THRESHOLD,
    min_sample: int = 0,
    transcript: Transcript | None = None,
) -> QuantumKey:
    """Pump exactly ``n_pulses`` in one batch and keep every surviving bit."""
    if n_pulses <= 0:
        raise ValueError("n_pulses must be positive")
    start = time.perf_counter()
    session = BB84Session(config, sacrifice_fraction, abort_threshold, min_sample, transcript)
    session.run_batch(n_pulses)
    return session.result(time.perf_counter() - start)
