"""AES block cipher (FIPS-197) for 128, 192 and 256-bit keys.

Straight table-driven implementation. The hot loops run in the compiled
``_ckernels`` extension when it is available, otherwise in ``_pykernels``.

Not constant time. This is a research artifact; do not use it to protect
real data.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from qaes._backend import kernels
from qaes._tables import INV_SBOX, ROUNDS, SBOX
from qaes.errors import BadPadding, InvalidKeyLength

BLOCK_SIZE = 16


class Direction(str, enum.Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


class ScheduleSource(str, enum.Enum):
    EXPANDED = "expanded"
    QUANTUM_STREAM = "quantum_stream"


def rounds_for(key_len: int) -> int:
    """Nr for a key of ``key_len`` bytes."""
    try:
        return ROUNDS[key_len]
    except KeyError:
        raise InvalidKeyLength(f"AES key must be 16, 24 or 32 bytes, got {key_len}") from None


@dataclass(frozen=True)
class StateMatrix:
    """The 4x4 byte state; ``cells`` is filled column by column from the block."""

    cells: bytes

    def __post_init__(self):
        if len(self.cells) != 16:
            raise ValueError(f"state needs exactly 16 bytes, got {len(self.cells)}")

    @classmethod
    def from_block(cls, block: bytes) -> StateMatrix:
        return cls(bytes(block))

    def __getitem__(self, pos: tuple[int, int]) -> int:
        row, col = pos
        return self.cells[row + 4 * col]

    def rows(self) -> list[bytes]:
        return [bytes(self.cells[r + 4 * c] for c in range(4)) for r in range(4)]

    def to_block(self) -> bytes:
        return self.cells


@dataclass(frozen=True)
class CipherKey:
    key: bytes

    def __post_init__(self):
        rounds_for(len(self.key))

    @property
    def rounds(self) -> int:
        return ROUNDS[len(self.key)]

    @property
    def size_bits(self) -> int:
        return 8 * len(self.key)


@dataclass(frozen=True)
class RoundKeySchedule:
    """Nr+1 round keys of 16 bytes each.

    ``source`` records whether the keys came from standard key expansion or
    were injected directly from a key stream.
    """

    round_keys: tuple[bytes, ...]
    source: ScheduleSource = ScheduleSource.EXPANDED

    def __post_init__(self):
        if len(self.round_keys) not in (11, 13, 15):
            raise InvalidKeyLength(
                f"schedule needs 11, 13 or 15 round keys, got {len(self.round_keys)}"
            )
        if any(len(k) != 16 for k in self.round_keys):
            raise InvalidKeyLength("every round key must be 16 bytes")

    @classmethod
    def from_bytes(cls, packed: bytes, source: ScheduleSource = ScheduleSource.EXPANDED):
        if len(packed) % 16:
            raise InvalidKeyLength("packed schedule length must be a multiple of 16")
        keys = tuple(bytes(packed[i:i + 16]) for i in range(0, len(packed), 16))
        return cls(keys, source)

    @property
    def rounds(self) -> int:
        return len(self.round_keys) - 1

    @property
    def packed(self) -> bytes:
        return b"".join(self.round_keys)

    def __len__(self):
        return len(self.round_keys)


def sbox_lookup(b: int, direction: Direction | str = Direction.FORWARD) -> int:
    if Direction(direction) is Direction.FORWARD:
        return SBOX[b]
    return INV_SBOX[b]


def key_expansion(key: bytes | CipherKey) -> RoundKeySchedule:
    if isinstance(key, CipherKey):
        key = key.key
    key = bytes(key)
    rounds_for(len(key))
    return RoundKeySchedule.from_bytes(kernels.expand_key(key))


def _block(block) -> bytes:
    block = bytes(block)
    if len(block) != BLOCK_SIZE:
        raise ValueError(f"AES block must be 16 bytes, got {len(block)}")
    return block


def encrypt_block(block: bytes, schedule: RoundKeySchedule) -> bytes:
    return kernels.encrypt_ecb(_block(block), schedule.packed, schedule.rounds)


def decrypt_block(block: bytes, schedule: RoundKeySchedule) -> bytes:
    return kernels.decrypt_ecb(_block(block), schedule.packed, schedule.rounds)


def pkcs7_pad(data: bytes, block_size: int = BLOCK_SIZE) -> bytes:
    n = block_size - len(data) % block_size
    return bytes(data) + bytes([n]) * n


def pkcs7_unpad(data: bytes, block_size: int = BLOCK_SIZE) -> bytes:
    if not data or len(data) % block_size:
        raise BadPadding("padded data must be a non-empty multiple of the block size")
    n = data[-1]
    if not 1 <= n <= block_size or data[-n:] != bytes([n]) * n:
        raise BadPadding("invalid PKCS#7 padding")
    return data[:-n]


def encrypt_ecb(data: bytes, key: bytes, pad: bool = True) -> bytes:
    """Baseline AES-ECB over ``data`` (PKCS#7 padded unless ``pad`` is false)."""
    schedule = key_expansion(key)
    if pad:
        data = pkcs7_pad(data)
    elif len(data) % BLOCK_SIZE:
        raise ValueError("unpadded ECB input must be a multiple of 16 bytes")
    return kernels.encrypt_ecb(bytes(data), schedule.packed, schedule.rounds)


def decrypt_ecb(data: bytes, key: bytes, pad: bool = True) -> bytes:
    schedule = key_expansion(key)
    if len(data) % BLOCK_SIZE:
        raise ValueError("ECB ciphertext must be a multiple of 16 bytes")
    out = kernels.decrypt_ecb(bytes(data), schedule.packed, schedule.rounds)
    return pkcs7_unpad(out) if pad else out
