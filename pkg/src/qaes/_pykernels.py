"""Pure-Python AES kernels.

Reference path and fallback for the compiled ``_ckernels`` module; both expose
the same functions with the same byte-level contracts.
"""

from qaes._tables import (
    INV_SBOX,
    INV_SHIFT_ROWS,
    MUL2,
    MUL3,
    MUL9,
    MUL11,
    MUL13,
    MUL14,
    RCON,
    ROUNDS,
    SBOX,
    SHIFT_ROWS,
)

BACKEND = "python"


def expand_key(key):
    """Return the (Nr+1)*16 byte round-key schedule for a 16/24/32-byte key."""
    nk = len(key) // 4
    nr = ROUNDS[len(key)]
    words = [list(key[4 * i:4 * i + 4]) for i in range(nk)]
    for i in range(nk, 4 * (nr + 1)):
        t = list(words[i - 1])
        if i % nk == 0:
            t = [SBOX[t[1]] ^ RCON[i // nk], SBOX[t[2]], SBOX[t[3]], SBOX[t[0]]]
        elif nk > 6 and i % nk == 4:
            t = [SBOX[b] for b in t]
        prev = words[i - nk]
        words.append([prev[j] ^ t[j] for j in range(4)])
    return bytes(b for w in words for b in w)


def expand_keys(keys, key_len):
    """Expand a concatenation of equal-length keys into concatenated schedules."""
    keys = bytes(keys)
    return b"".join(expand_key(keys[i:i + key_len]) for i in range(0, len(keys), key_len))


def _encrypt(s, rk, nr):
    s = [s[i] ^ rk[i] for i in range(16)]
    for rnd in range(1, nr):
        t = [SBOX[s[j]] for j in SHIFT_ROWS]
        k = 16 * rnd
        out = []
        for c in range(0, 16, 4):
            a0, a1, a2, a3 = t[c], t[c + 1], t[c + 2], t[c + 3]
            out.append(MUL2[a0] ^ MUL3[a1] ^ a2 ^ a3 ^ rk[k + c])
            out.append(a0 ^ MUL2[a1] ^ MUL3[a2] ^ a3 ^ rk[k + c + 1])
            out.append(a0 ^ a1 ^ MUL2[a2] ^ MUL3[a3] ^ rk[k + c + 2])
            out.append(MUL3[a0] ^ a1 ^ a2 ^ MUL2[a3] ^ rk[k + c + 3])
        s = out
    k = 16 * nr
    return bytes(SBOX[s[SHIFT_ROWS[i]]] ^ rk[k + i] for i in range(16))


def _decrypt(s, rk, nr):
    k = 16 * nr
    s = [s[i] ^ rk[k + i] for i in range(16)]
    for rnd in range(nr - 1, 0, -1):
        k = 16 * rnd
        t = [INV_SBOX[s[j]] ^ rk[k + i] for i, j in enumerate(INV_SHIFT_ROWS)]
        s = []
        for c in range(0, 16, 4):
            a0, a1, a2, a3 = t[c], t[c + 1], t[c + 2], t[c + 3]
            s.append(MUL14[a0] ^ MUL11[a1] ^ MUL13[a2] ^ MUL9[a3])
            s.append(MUL9[a0] ^ MUL14[a1] ^ MUL11[a2] ^ MUL13[a3])
            s.append(MUL13[a0] ^ MUL9[a1] ^ MUL14[a2] ^ MUL11[a3])
            s.append(MUL11[a0] ^ MUL13[a1] ^ MUL9[a2] ^ MUL14[a3])
    return bytes(INV_SBOX[s[j]] ^ rk[i] for i, j in enumerate(INV_SHIFT_ROWS))


def _check(data_len, sched_len, nr, need):
    if data_len % 16:
        raise ValueError("data length must be a multiple of 16")
    if nr not in (10, 12, 14):
        raise ValueError("round count must be 10, 12 or 14")
    if sched_len < need:
        raise ValueError("round-key schedule too short")


def encrypt_ecb(data, schedule, nr):
    """Encrypt every 16-byte block of ``data`` under one schedule."""
    data = bytes(data)
    schedule = bytes(schedule)
    _check(len(data), len(schedule), nr, 16 * (nr + 1))
    return b"".join(_encrypt(data[i:i + 16], schedule, nr) for i in range(0, len(data), 16))


def decrypt_ecb(data, schedule, nr):
    data = bytes(data)
    schedule = bytes(schedule)
    _check(len(data), len(schedule), nr, 16 * (nr + 1))
    return b"".join(_decrypt(data[i:i + 16], schedule, nr) for i in range(0, len(data), 16))


def encrypt_multi(data, schedules, nr):
    """Encrypt block i of ``data`` under schedule i of ``schedules``."""
    data = bytes(data)
    schedules = bytes(schedules)
    step = 16 * (nr + 1)
    _check(len(data), len(schedules), nr, step * (len(data) // 16))
    return b"".join(
        _encrypt(data[16 * b:16 * b + 16], schedules[step * b:step * (b + 1)], nr)
        for b in range(len(data) // 16)
    )


def decrypt_multi(data, schedules, nr):
    data = bytes(data)
    schedules = bytes(schedules)
    step = 16 * (nr + 1)
    _check(len(data), len(schedules), nr, step * (len(data) // 16))
    return b"".join(
        _decrypt(data[16 * b:16 * b + 16], schedules[step * b:step * (b + 1)], nr)
        for b in range(len(data) // 16)
    )
