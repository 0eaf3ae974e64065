"""Rijndael lookup tables, generated from GF(2^8) arithmetic at import time."""


def _xtime(a):
    a <<= 1
    return (a ^ 0x11B) if a & 0x100 else a


def gf_mul(a, b):
    """Multiply two field elements modulo x^8 + x^4 + x^3 + x + 1."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a = _xtime(a)
        b >>= 1
    return out


def _build_sbox():
    inverse = [0] * 256
    for a in range(1, 256):
        for b in range(1, 256):
            if gf_mul(a, b) == 1:
                inverse[a] = b
                break
    sbox = []
    for a in range(256):
        x = inverse[a]
        # affine map: x ^ rotl(x,1) ^ rotl(x,2) ^ rotl(x,3) ^ rotl(x,4) ^ 0x63
        y = x
        for shift in range(1, 5):
            y ^= ((x << shift) | (x >> (8 - shift))) & 0xFF
        sbox.append(y ^ 0x63)
    return sbox


SBOX = tuple(_build_sbox())
INV_SBOX = tuple(SBOX.index(v) for v in range(256))

MUL2 = tuple(gf_mul(v, 2) for v in range(256))
MUL3 = tuple(gf_mul(v, 3) for v in range(256))
MUL9 = tuple(gf_mul(v, 9) for v in range(256))
MUL11 = tuple(gf_mul(v, 11) for v in range(256))
MUL13 = tuple(gf_mul(v, 13) for v in range(256))
MUL14 = tuple(gf_mul(v, 14) for v in range(256))

RCON = (0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)

# State bytes are column-major: index = row + 4 * column.
# ShiftRows moves the byte at (row, column + row) to (row, column).
SHIFT_ROWS = tuple(r + 4 * ((c + r) % 4) for c in range(4) for r in range(4))
INV_SHIFT_ROWS = tuple(r + 4 * ((c - r) % 4) for c in range(4) for r in range(4))

ROUNDS = {16: 10, 24: 12, 32: 14}
