"""AES encryption keyed by simulated BB84 quantum key distribution."""

from qaes._backend import BACKEND
from qaes.aes import decrypt_ecb, encrypt_ecb, key_expansion
from qaes.bb84 import ChannelConfig, QuantumKey, generate_key
from qaes.errors import QaesError, QberAbort
from qaes.mode import (
    DerivedProvider,
    FixedProvider,
    KeyMode,
    LiveBB84Provider,
    QaesConfig,
    qaes_decrypt,
    qaes_encrypt,
    run_two_party,
)

__all__ = [
    "BACKEND",
    "ChannelConfig",
    "DerivedProvider",
    "FixedProvider",
    "KeyMode",
    "LiveBB84Provider",
    "QaesConfig",
    "QaesError",
    "QberAbort",
    "QuantumKey",
    "decrypt_ecb",
    "encrypt_ecb",
    "generate_key",
    "key_expansion",
    "qaes_decrypt",
    "qaes_encrypt",
    "run_two_party",
]
