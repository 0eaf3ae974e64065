"""QAES: AES keyed by a stream of quantum-derived keys qk1, qk2, ...

Two key modes:

* ``PER_BLOCK``: block i is encrypted with standard AES under qk_i.
* ``PER_ROUND``: block i's round keys are taken directly from the key
  stream, Nr+1 consecutive 16-byte chunks per block, skipping key expansion.

The key stream is the concatenation qk1 || qk2 || ...; a 16-byte chunk c is
``stream[16c:16c+16]``. Providers hand out keys by 1-based index.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from qaes import bb84
from qaes._backend import kernels
from qaes.aes import BLOCK_SIZE, key_expansion, pkcs7_pad, pkcs7_unpad, rounds_for
from qaes.bb84 import ChannelConfig, QuantumKey
from qaes.errors import HeaderMismatch, InvalidKeyLength, KeyStreamExhausted

MAGIC = b"QAES"
VERSION = 1
_HEADER = struct.Struct(">4sBBBQ")
HEADER_SIZE = _HEADER.size

# blocks processed per kernel call; bounds the size of the schedule buffer
_CHUNK_BLOCKS = 4096


class KeyMode(str, enum.Enum):
    PER_BLOCK = "per-block"
    PER_ROUND = "per-round"


class ProviderKind(str, enum.Enum):
    LIVE_BB84 = "live-bb84"
    DERIVED = "derived"
    FIXED = "fixed"


_SIZE_CODES = {128: 1, 192: 2, 256: 3}
_MODE_CODES = {KeyMode.PER_BLOCK: 1, KeyMode.PER_ROUND: 2}


@dataclass(frozen=True)
class QaesConfig:
    key_size_bits: int = 128
    key_mode: KeyMode = KeyMode.PER_BLOCK
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    padding: str = "pkcs7"

    def __post_init__(self):
        if self.key_size_bits not in _SIZE_CODES:
            raise InvalidKeyLength(f"key size must be 128, 192 or 256 bits, got {self.key_size_bits}")
        object.__setattr__(self, "key_mode", KeyMode(self.key_mode))
        if self.padding != "pkcs7":
            raise ValueError("only PKCS#7 padding is supported")

    @property
    def key_bytes(self) -> int:
        return self.key_size_bits // 8

    @property
    def rounds(self) -> int:
        return rounds_for(self.key_bytes)

    @property
    def stream_bytes_per_block(self) -> int:
        """Key-stream bytes consumed for every encrypted block."""
        if self.key_mode is KeyMode.PER_ROUND:
            return 16 * (self.rounds + 1)
        return self.key_bytes


class KeyProvider:
    """Source of the ordered key sequence qk1, qk2, ...

    ``consumed`` tracks the furthest key-stream byte handed out so far.
    """

    kind: ProviderKind

    def __init__(self, key_bytes: int):
        rounds_for(key_bytes)
        self.key_bytes = key_bytes
        self.consumed = 0

    def _take(self, start: int, count: int) -> bytes:
        raise NotImplementedError

    def next_key(self, index: int) -> bytes:
        return self.take(index, 1)

    def take(self, start: int, count: int) -> bytes:
        """Concatenation of qk_start ... qk_(start+count-1)."""
        if start < 1:
            raise IndexError("key indices start at 1")
        out = self._take(start, count)
        self.consumed = max(self.consumed, (start - 1 + count) * self.key_bytes)
        return out

    def stream(self, offset: int, length: int) -> bytes:
        """``length`` bytes of the key stream starting at byte ``offset``."""
        if length <= 0:
            return b""
        kb = self.key_bytes
        first = offset // kb
        last = (offset + length - 1) // kb
        raw = self._take(first + 1, last - first + 1)
        skip = offset - first * kb
        self.consumed = max(self.consumed, offset + length)
        return raw[skip:skip + length]

    def materialize(self, count: int) -> KeyStream:
        raw = self.take(1, count)
        kb = self.key_bytes
        return KeyStream(tuple(raw[i:i + kb] for i in range(0, len(raw), kb)), self.kind)


class FixedProvider(KeyProvider):
    """The same key at every index. For testing and baseline comparisons."""

    kind = ProviderKind.FIXED

    def __init__(self, key: bytes):
        super().__init__(len(key))
        self.key = bytes(key)

    def _take(self, start, count):
        return self.key * count


class DerivedProvider(KeyProvider):
    """Expands one master quantum key into a key sequence.

    qk_i is the first ``key_bytes`` of AES_master(c) || AES_master(c+1) ...
    where the 128-bit big-endian counters c start at (i-1) * m and m is the
    number of 16-byte blocks per key. Both parties holding the master
    compute the same sequence.
    """

    kind = ProviderKind.DERIVED

    def __init__(self, master: bytes, key_bytes: int | None = None):
        master = bytes(master)
        super().__init__(key_bytes or len(master))
        self._schedule = key_expansion(master)
        self._per_key = math.ceil(self.key_bytes / 16)

    def _take(self, start, count):
        m = self._per_key
        ctr = np.zeros((count * m, 2), dtype=">u8")
        ctr[:, 1] = np.arange((start - 1) * m, (start - 1 + count) * m, dtype=np.uint64)
        blocks = kernels.encrypt_ecb(ctr.tobytes(), self._schedule.packed, self._schedule.rounds)
        if self.key_bytes == 16 * m:
            return blocks
        step = 16 * m
        return b"".join(blocks[i:i + self.key_bytes] for i in range(0, len(blocks), step))


def session_seed(seed: int, index: int) -> int:
    """Deterministic per-session seed for the ``index``-th live BB84 run."""
    state = np.random.SeedSequence([seed, index]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


class LiveBB84Provider(KeyProvider):
    """Runs a fresh BB84 session for every key.

    ``role`` picks which party's copy of each key is returned. Sessions are
    cached so a provider can replay its sequence; ``sessions`` keeps every
    QuantumKey for timing analysis. Slow: one protocol run per block.
    """

    kind = ProviderKind.LIVE_BB84

    def __init__(self, channel: ChannelConfig, key_bytes: int = 16, role: str = "sender", **bb84_options):
        super().__init__(key_bytes)
        if role not in ("sender", "receiver"):
            raise ValueError("role must be 'sender' or 'receiver'")
        self.channel = channel
        self.role = role
        self.options = bb84_options
        self.sessions: dict[int, QuantumKey] = {}

    def session(self, index: int) -> QuantumKey:
        if index not in self.sessions:
            cfg = replace(self.channel, rng_seed=session_seed(self.channel.rng_seed, index))
            self.sessions[index] = bb84.generate_key(8 * self.key_bytes, cfg, **self.options)
        return self.sessions[index]

    def _take(self, start, count):
        receiver = self.role == "receiver"
        return b"".join(self.session(i).to_bytes(receiver) for i in range(start, start + count))


class KeyStream(KeyProvider):
    """A finite, materialized key sequence (e.g. loaded from a key file).

    ``provider`` records where the keys originally came from.
    """

    def __init__(self, keys, provider: ProviderKind = ProviderKind.FIXED):
        keys = tuple(bytes(k) for k in keys)
        if not keys:
            raise KeyStreamExhausted("key stream is empty")
        if len({len(k) for k in keys}) != 1:
            raise InvalidKeyLength("all keys in a stream must have the same length")
        super().__init__(len(keys[0]))
        self.keys = keys
        self.provider = self.kind = ProviderKind(provider)

    def __len__(self):
        return len(self.keys)

    def _take(self, start, count):
        if start - 1 + count > len(self.keys):
            raise KeyStreamExhausted(
                f"need key {start - 1 + count} but the stream holds {len(self.keys)}"
            )
        return b"".join(self.keys[start - 1:start - 1 + count])

    def to_file(self, path) -> None:
        Path(path).write_text("".join(k.hex() + "\n" for k in self.keys))

    @classmethod
    def from_file(cls, path, provider: ProviderKind = ProviderKind.FIXED) -> KeyStream:
        lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
        return cls([bytes.fromhex(ln) for ln in lines if ln], provider)


@dataclass(frozen=True)
class QaesCiphertext:
    key_size_bits: int
    key_mode: KeyMode
    block_count: int
    body: bytes
    version: int = VERSION

    def __post_init__(self):
        if len(self.body) != 16 * self.block_count:
            raise HeaderMismatch(
                f"body holds {len(self.body)} bytes but header announces {self.block_count} blocks"
            )

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(MAGIC, self.version, _SIZE_CODES[self.key_size_bits],
                              _MODE_CODES[KeyMode(self.key_mode)], self.block_count)
        return header + self.body

    @classmethod
    def from_bytes(cls, data: bytes) -> QaesCiphertext:
        if len(data) < HEADER_SIZE:
            raise HeaderMismatch("input shorter than the QAES header")
        magic, version, size_code, mode_code, blocks = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise HeaderMismatch(f"bad magic {magic!r}")
        if version != VERSION:
            raise HeaderMismatch(f"unsupported container version {version}")
        sizes = {v: k for k, v in _SIZE_CODES.items()}
        modes = {v: k for k, v in _MODE_CODES.items()}
        if size_code not in sizes or mode_code not in modes:
            raise HeaderMismatch("unknown key-size or key-mode code")
        return cls(sizes[size_code], modes[mode_code], blocks, bytes(data[HEADER_SIZE:]), version)


def _check_provider(config: QaesConfig, provider: KeyProvider) -> None:
    if provider.key_bytes != config.key_bytes:
        raise InvalidKeyLength(
            f"provider yields {8 * provider.key_bytes}-bit keys, config needs {config.key_size_bits}"
        )


def _schedules(config: QaesConfig, provider: KeyProvider, first_block: int, count: int) -> bytes:
    """Packed round-key schedules for blocks first_block .. first_block+count-1 (0-based)."""
    if config.key_mode is KeyMode.PER_BLOCK:
        keys = provider.take(first_block + 1, count)
        return kernels.expand_keys(keys, config.key_bytes)
    per_block = config.stream_bytes_per_block
    return provider.stream(first_block * per_block, count * per_block)


def _apply(data: bytes, config: QaesConfig, provider: KeyProvider, fn) -> bytes:
    n_blocks = len(data) // BLOCK_SIZE
    out = []
    for first in range(0, n_blocks, _CHUNK_BLOCKS):
        count = min(_CHUNK_BLOCKS, n_blocks - first)
        sched = _schedules(config, provider, first, count)
        out.append(fn(data[16 * first:16 * (first + count)], sched, config.rounds))
    return b"".join(out)


def qaes_encrypt(plaintext: bytes, config: QaesConfig, provider: KeyProvider) -> QaesCiphertext:
    """PKCS#7-pad ``plaintext`` and encrypt block i under the i-th key material."""
    _check_provider(config, provider)
    padded = pkcs7_pad(bytes(plaintext))
    body = _apply(padded, config, provider, kernels.encrypt_multi)
    return QaesCiphertext(config.key_size_bits, config.key_mode, len(padded) // 16, body)


def qaes_decrypt(ciphertext: QaesCiphertext | bytes, config: QaesConfig, provider: KeyProvider) -> bytes:
    """Invert ``qaes_encrypt``; ``provider`` must replay the same key sequence.

    Raises HeaderMismatch when the container disagrees with ``config`` and
    BadPadding when the recovered padding is invalid (wrong keys or damage).
    """
    if not isinstance(ciphertext, QaesCiphertext):
        ciphertext = QaesCiphertext.from_bytes(ciphertext)
    if ciphertext.key_size_bits != config.key_size_bits:
        raise HeaderMismatch(
            f"ciphertext uses {ciphertext.key_size_bits}-bit keys, config says {config.key_size_bits}"
        )
    if ciphertext.key_mode != config.key_mode:
        raise HeaderMismatch(
            f"ciphertext key mode {ciphertext.key_mode.value}, config says {config.key_mode.value}"
        )
    if ciphertext.block_count == 0:
        raise HeaderMismatch("ciphertext holds no blocks")
    _check_provider(config, provider)
    padded = _apply(ciphertext.body, config, provider, kernels.decrypt_multi)
    return pkcs7_unpad(padded)


@dataclass
class TwoPartyRun:
    master: QuantumKey
    ciphertext: QaesCiphertext
    recovered: bytes


def establish_providers(config: QaesConfig, **bb84_options):
    """Run one BB84 session and build each party's DerivedProvider from its own
    copy of the master key. Raises QberAbort before any key is usable."""
    master = bb84.generate_key(config.key_size_bits, config.channel, **bb84_options)
    sender = DerivedProvider(master.to_bytes(), config.key_bytes)
    receiver = DerivedProvider(master.to_bytes(receiver=True), config.key_bytes)
    return master, sender, receiver


def run_two_party(plaintext: bytes, config: QaesConfig, **bb84_options) -> TwoPartyRun:
    """Sender encrypts, receiver decrypts; they share only the BB84 output."""
    master, sender, receiver = establish_providers(config, **bb84_options)
    ct = qaes_encrypt(plaintext, config, sender)
    wire = ct.to_bytes()
    recovered = qaes_decrypt(wire, config, receiver)
    return TwoPartyRun(master, ct, recovered)
