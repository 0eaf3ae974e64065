import pytest
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from hypothesis import given, settings
from hypothesis import strategies as st

from qaes import aes
from qaes._tables import INV_SBOX, SBOX, gf_mul
from qaes.errors import BadPadding, InvalidKeyLength

PLAIN = bytes.fromhex("00112233445566778899aabbccddeeff")

# FIPS-197 appendix C: key 000102..., plaintext 00112233...
FIPS_VECTORS = [
    (16, "69c4e0d86a7b0430d8cdb78070b4c55a"),
    (24, "dda97ca4864cdfe06eaf70a0ec0d7191"),
    (32, "8ea2b7ca516745bfeafc49904b496089"),
]


def reference_ecb(key, data, decrypt=False):
    ctx = Cipher(algorithms.AES(key), modes.ECB())
    op = ctx.decryptor() if decrypt else ctx.encryptor()
    return op.update(data) + op.finalize()


def test_sbox_known_entries():
    assert SBOX[0x00] == 0x63
    assert SBOX[0x53] == 0xED
    assert SBOX[0xFF] == 0x16
    assert aes.sbox_lookup(0x53) == 0xED
    assert aes.sbox_lookup(0xED, "inverse") == 0x53


def test_sbox_is_permutation_and_inverse_matches():
    assert sorted(SBOX) == list(range(256))
    assert all(INV_SBOX[SBOX[b]] == b for b in range(256))


def test_sbox_has_no_fixed_points():
    assert all(SBOX[b] != b and SBOX[b] != b ^ 0xFF for b in range(256))


def test_gf_mul():
    assert gf_mul(0x57, 0x83) == 0xC1
    assert gf_mul(0x57, 0x13) == 0xFE


def test_key_expansion_zero_key():
    sched = aes.key_expansion(bytes(16))
    words = sched.packed.hex()
    assert words[32:64] == "62636363" * 4
    assert sched.rounds == 10
    assert len(sched.round_keys) == 11


def test_key_expansion_fips_128():
    key = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
    sched = aes.key_expansion(key)
    assert sched.round_keys[0] == key
    assert sched.packed[16:20].hex() == "a0fafe17"
    assert sched.packed[-4:].hex() == "b6630ca6"


@pytest.mark.parametrize("key_len, expected", FIPS_VECTORS)
def test_fips_known_answers(key_len, expected):
    key = bytes(range(key_len))
    sched = aes.key_expansion(key)
    ct = aes.encrypt_block(PLAIN, sched)
    assert ct.hex() == expected
    assert ct == reference_ecb(key, PLAIN)
    assert aes.decrypt_block(ct, sched) == PLAIN


@pytest.mark.parametrize("key_len, rounds", [(16, 10), (24, 12), (32, 14)])
def test_round_counts(key_len, rounds):
    assert aes.rounds_for(key_len) == rounds
    assert aes.key_expansion(bytes(key_len)).rounds == rounds
    assert len(aes.key_expansion(bytes(key_len)).packed) == 16 * (rounds + 1)


@pytest.mark.parametrize("bad", [0, 8, 15, 17, 31, 33])
def test_bad_key_length(bad):
    with pytest.raises(InvalidKeyLength):
        aes.key_expansion(bytes(bad))


def test_state_matrix_is_column_major():
    state = aes.StateMatrix.from_block(bytes(range(16)))
    assert state[0, 0] == 0
    assert state[1, 0] == 1
    assert state[0, 1] == 4
    assert state.to_block() == bytes(range(16))


@settings(max_examples=200, deadline=None)
@given(key=st.sampled_from([16, 24, 32]).flatmap(lambda n: st.binary(min_size=n, max_size=n)),
       data=st.binary(max_size=200))
def test_ecb_matches_reference(key, data):
    ct = aes.encrypt_ecb(data, key)
    assert ct == reference_ecb(key, aes.pkcs7_pad(data))
    assert aes.decrypt_ecb(ct, key) == data


@settings(max_examples=200, deadline=None)
@given(data=st.binary(max_size=100))
def test_pkcs7_round_trip(data):
    padded = aes.pkcs7_pad(data)
    assert len(padded) % 16 == 0
    assert len(padded) - len(data) in range(1, 17)
    assert aes.pkcs7_unpad(padded) == data


def test_pkcs7_full_block_for_aligned_input():
    assert aes.pkcs7_pad(bytes(16))[16:] == bytes([16]) * 16


@pytest.mark.parametrize("bad", [b"", bytes(15), bytes(16), bytes(15) + b"\x11",
                                 bytes(13) + b"\x01\x02\x03"])
def test_pkcs7_rejects_bad_padding(bad):
    with pytest.raises(BadPadding):
        aes.pkcs7_unpad(bad)


def test_avalanche_single_plaintext_bit(rng):
    key = rng.bytes(16)
    sched = aes.key_expansion(key)
    flips = []
    for _ in range(200):
        block = bytearray(rng.bytes(16))
        a = aes.encrypt_block(bytes(block), sched)
        bit = int(rng.integers(128))
        block[bit // 8] ^= 0x80 >> (bit % 8)
        b = aes.encrypt_block(bytes(block), sched)
        flips.append(bin(int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).count("1"))
    assert abs(sum(flips) / len(flips) - 64) < 8


def test_key_bit_flip_changes_ciphertext(rng):
    key = bytearray(rng.bytes(16))
    ct = aes.encrypt_block(PLAIN, aes.key_expansion(bytes(key)))
    for bit in range(0, 128, 7):
        k2 = bytearray(key)
        k2[bit // 8] ^= 1 << (bit % 8)
        assert aes.encrypt_block(PLAIN, aes.key_expansion(bytes(k2))) != ct


def test_unpadded_mode_requires_whole_blocks():
    key = bytes(16)
    assert aes.encrypt_ecb(bytes(32), key, pad=False) == reference_ecb(key, bytes(32))
    with pytest.raises(ValueError):
        aes.encrypt_ecb(bytes(20), key, pad=False)


def test_round_key_schedule_from_bytes():
    sched = aes.key_expansion(bytes(range(32)))
    again = aes.RoundKeySchedule.from_bytes(sched.packed)
    assert again.packed == sched.packed and again.rounds == 14
    with pytest.raises(ValueError):
        aes.RoundKeySchedule.from_bytes(bytes(100))
