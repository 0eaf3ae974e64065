# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled AES kernels; same contracts as ``qaes._pykernels``."""

from libc.string cimport memcpy

from qaes._tables import (
    INV_SBOX as _INV_SBOX,
    MUL2 as _MUL2,
    MUL3 as _MUL3,
    MUL9 as _MUL9,
    MUL11 as _MUL11,
    MUL13 as _MUL13,
    MUL14 as _MUL14,
    RCON as _RCON,
    SBOX as _SBOX,
)

BACKEND = "cython"

cdef unsigned char SBOX[256]
cdef unsigned char INV_SBOX[256]
cdef unsigned char M2[256]
cdef unsigned char M3[256]
cdef unsigned char M9[256]
cdef unsigned char M11[256]
cdef unsigned char M13[256]
cdef unsigned char M14[256]
cdef unsigned char RCON[11]

cdef int _i
for _i in range(256):
    SBOX[_i] = _SBOX[_i]
    INV_SBOX[_i] = _INV_SBOX[_i]
    M2[_i] = _MUL2[_i]
    M3[_i] = _MUL3[_i]
    M9[_i] = _MUL9[_i]
    M11[_i] = _MUL11[_i]
    M13[_i] = _MUL13[_i]
    M14[_i] = _MUL14[_i]
for _i in range(11):
    RCON[_i] = _RCON[_i]


cdef inline int _rounds(Py_ssize_t key_len) except -1:
    if key_len == 16:
        return 10
    if key_len == 24:
        return 12
    if key_len == 32:
        return 14
    raise ValueError("key length must be 16, 24 or 32 bytes")


cdef void _expand(const unsigned char *key, int nk, int nr, unsigned char *w) noexcept nogil:
    cdef int i, j
    cdef unsigned char t[4]
    cdef unsigned char tmp
    memcpy(w, key, 4 * nk)
    for i in range(nk, 4 * (nr + 1)):
        for j in range(4):
            t[j] = w[4 * (i - 1) + j]
        if i % nk == 0:
            tmp = t[0]
            t[0] = SBOX[t[1]] ^ RCON[i // nk]
            t[1] = SBOX[t[2]]
            t[2] = SBOX[t[3]]
            t[3] = SBOX[tmp]
        elif nk > 6 and i % nk == 4:
            for j in range(4):
                t[j] = SBOX[t[j]]
        for j in range(4):
            w[4 * i + j] = w[4 * (i - nk) + j] ^ t[j]


cdef void _encrypt(const unsigned char *inp, const unsigned char *rk, int nr,
                   unsigned char *out) noexcept nogil:
    cdef unsigned char s[16]
    cdef unsigned char t[16]
    cdef unsigned char a0, a1, a2, a3
    cdef int i, c, rnd
    for i in range(16):
        s[i] = inp[i] ^ rk[i]
    for rnd in range(1, nr):
        # SubBytes + ShiftRows; state is column-major
        t[0] = SBOX[s[0]]; t[1] = SBOX[s[5]]; t[2] = SBOX[s[10]]; t[3] = SBOX[s[15]]
        t[4] = SBOX[s[4]]; t[5] = SBOX[s[9]]; t[6] = SBOX[s[14]]; t[7] = SBOX[s[3]]
        t[8] = SBOX[s[8]]; t[9] = SBOX[s[13]]; t[10] = SBOX[s[2]]; t[11] = SBOX[s[7]]
        t[12] = SBOX[s[12]]; t[13] = SBOX[s[1]]; t[14] = SBOX[s[6]]; t[15] = SBOX[s[11]]
        rk += 16
        for c in range(0, 16, 4):
            a0 = t[c]; a1 = t[c + 1]; a2 = t[c + 2]; a3 = t[c + 3]
            s[c] = M2[a0] ^ M3[a1] ^ a2 ^ a3 ^ rk[c]
            s[c + 1] = a0 ^ M2[a1] ^ M3[a2] ^ a3 ^ rk[c + 1]
            s[c + 2] = a0 ^ a1 ^ M2[a2] ^ M3[a3] ^ rk[c + 2]
            s[c + 3] = M3[a0] ^ a1 ^ a2 ^ M2[a3] ^ rk[c + 3]
    rk += 16
    out[0] = SBOX[s[0]] ^ rk[0]; out[1] = SBOX[s[5]] ^ rk[1]
    out[2] = SBOX[s[10]] ^ rk[2]; out[3] = SBOX[s[15]] ^ rk[3]
    out[4] = SBOX[s[4]] ^ rk[4]; out[5] = SBOX[s[9]] ^ rk[5]
    out[6] = SBOX[s[14]] ^ rk[6]; out[7] = SBOX[s[3]] ^ rk[7]
    out[8] = SBOX[s[8]] ^ rk[8]; out[9] = SBOX[s[13]] ^ rk[9]
    out[10] = SBOX[s[2]] ^ rk[10]; out[11] = SBOX[s[7]] ^ rk[11]
    out[12] = SBOX[s[12]] ^ rk[12]; out[13] = SBOX[s[1]] ^ rk[13]
    out[14] = SBOX[s[6]] ^ rk[14]; out[15] = SBOX[s[11]] ^ rk[15]


cdef void _decrypt(const unsigned char *inp, const unsigned char *rk, int nr,
                   unsigned char *out) noexcept nogil:
    cdef unsigned char s[16]
    cdef unsigned char t[16]
    cdef unsigned char a0, a1, a2, a3
    cdef const unsigned char *k
    cdef int i, c, rnd
    k = rk + 16 * nr
    for i in range(16):
        s[i] = inp[i] ^ k[i]
    for rnd in range(nr - 1, 0, -1):
        k = rk + 16 * rnd
        # InvShiftRows + InvSubBytes + AddRoundKey
        t[0] = INV_SBOX[s[0]] ^ k[0]; t[1] = INV_SBOX[s[13]] ^ k[1]
        t[2] = INV_SBOX[s[10]] ^ k[2]; t[3] = INV_SBOX[s[7]] ^ k[3]
        t[4] = INV_SBOX[s[4]] ^ k[4]; t[5] = INV_SBOX[s[1]] ^ k[5]
        t[6] = INV_SBOX[s[14]] ^ k[6]; t[7] = INV_SBOX[s[11]] ^ k[7]
        t[8] = INV_SBOX[s[8]] ^ k[8]; t[9] = INV_SBOX[s[5]] ^ k[9]
        t[10] = INV_SBOX[s[2]] ^ k[10]; t[11] = INV_SBOX[s[15]] ^ k[11]
        t[12] = INV_SBOX[s[12]] ^ k[12]; t[13] = INV_SBOX[s[9]] ^ k[13]
        t[14] = INV_SBOX[s[6]] ^ k[14]; t[15] = INV_SBOX[s[3]] ^ k[15]
        for c in range(0, 16, 4):
            a0 = t[c]; a1 = t[c + 1]; a2 = t[c + 2]; a3 = t[c + 3]
            s[c] = M14[a0] ^ M11[a1] ^ M13[a2] ^ M9[a3]
            s[c + 1] = M9[a0] ^ M14[a1] ^ M11[a2] ^ M13[a3]
            s[c + 2] = M13[a0] ^ M9[a1] ^ M14[a2] ^ M11[a3]
            s[c + 3] = M11[a0] ^ M13[a1] ^ M9[a2] ^ M14[a3]
    out[0] = INV_SBOX[s[0]] ^ rk[0]; out[1] = INV_SBOX[s[13]] ^ rk[1]
    out[2] = INV_SBOX[s[10]] ^ rk[2]; out[3] = INV_SBOX[s[7]] ^ rk[3]
    out[4] = INV_SBOX[s[4]] ^ rk[4]; out[5] = INV_SBOX[s[1]] ^ rk[5]
    out[6] = INV_SBOX[s[14]] ^ rk[6]; out[7] = INV_SBOX[s[11]] ^ rk[7]
    out[8] = INV_SBOX[s[8]] ^ rk[8]; out[9] = INV_SBOX[s[5]] ^ rk[9]
    out[10] = INV_SBOX[s[2]] ^ rk[10]; out[11] = INV_SBOX[s[15]] ^ rk[11]
    out[12] = INV_SBOX[s[12]] ^ rk[12]; out[13] = INV_SBOX[s[9]] ^ rk[13]
    out[14] = INV_SBOX[s[6]] ^ rk[14]; out[15] = INV_SBOX[s[3]] ^ rk[15]


def expand_key(const unsigned char[::1] key):
    cdef int nr = _rounds(key.shape[0])
    out = bytearray(16 * (nr + 1))
    cdef unsigned char[::1] w = out
    _expand(&key[0], key.shape[0] // 4, nr, &w[0])
    return bytes(out)


def expand_keys(const unsigned char[::1] keys, Py_ssize_t key_len):
    cdef int nr = _rounds(key_len)
    cdef Py_ssize_t n = keys.shape[0] // key_len
    cdef Py_ssize_t step = 16 * (nr + 1)
    cdef Py_ssize_t i
    cdef int nk = key_len // 4
    out = bytearray(step * n)
    if n == 0:
        return bytes(out)
    cdef unsigned char[::1] w = out
    with nogil:
        for i in range(n):
            _expand(&keys[i * key_len], nk, nr, &w[i * step])
    return bytes(out)


def _check(Py_ssize_t data_len, Py_ssize_t sched_len, int nr, Py_ssize_t need):
    if data_len % 16:
        raise ValueError("data length must be a multiple of 16")
    if nr not in (10, 12, 14):
        raise ValueError("round count must be 10, 12 or 14")
    if sched_len < need:
        raise ValueError("round-key schedule too short")


def encrypt_ecb(const unsigned char[::1] data, const unsigned char[::1] schedule, int nr):
    cdef Py_ssize_t n = data.shape[0]
    cdef Py_ssize_t i
    _check(n, schedule.shape[0], nr, 16 * (nr + 1))
    out = bytearray(n)
    if n == 0:
        return bytes(out)
    cdef unsigned char[::1] o = out
    with nogil:
        for i in range(0, n, 16):
            _encrypt(&data[i], &schedule[0], nr, &o[i])
    return bytes(out)


def decrypt_ecb(const unsigned char[::1] data, const unsigned char[::1] schedule, int nr):
    cdef Py_ssize_t n = data.shape[0]
    cdef Py_ssize_t i
    _check(n, schedule.shape[0], nr, 16 * (nr + 1))
    out = bytearray(n)
    if n == 0:
        return bytes(out)
    cdef unsigned char[::1] o = out
    with nogil:
        for i in range(0, n, 16):
            _decrypt(&data[i], &schedule[0], nr, &o[i])
    return bytes(out)


def encrypt_multi(const unsigned char[::1] data, const unsigned char[::1] schedules, int nr):
    cdef Py_ssize_t n = data.shape[0]
    cdef Py_ssize_t step = 16 * (nr + 1)
    cdef Py_ssize_t b
    _check(n, schedules.shape[0], nr, step * (n // 16))
    out = bytearray(n)
    if n == 0:
        return bytes(out)
    cdef unsigned char[::1] o = out
    with nogil:
        for b in range(n // 16):
            _encrypt(&data[16 * b], &schedules[step * b], nr, &o[16 * b])
    return bytes(out)


def decrypt_multi(const unsigned char[::1] data, const unsigned char[::1] schedules, int nr):
    cdef Py_ssize_t n = data.shape[0]
    cdef Py_ssize_t step = 16 * (nr + 1)
    cdef Py_ssize_t b
    _check(n, schedules.shape[0], nr, step * (n // 16))
    out = bytearray(n)
    if n == 0:
        return bytes(out)
    cdef unsigned char[::1] o = out
    with nogil:
        for b in range(n // 16):
            _decrypt(&data[16 * b], &schedules[step * b], nr, &o[16 * b])
    return bytes(out)
