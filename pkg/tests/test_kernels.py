import os
import subprocess
import sys

import numpy as np
import pytest
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from qaes._backend import available


def reference_ecb(key, data):
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(data) + enc.finalize()


@pytest.mark.parametrize("key_len", [16, 24, 32])
def test_single_key_kernel(kernel, key_len, rng):
    key = rng.bytes(key_len)
    data = rng.bytes(16 * 37)
    sched = kernel.expand_key(key)
    nr = {16: 10, 24: 12, 32: 14}[key_len]
    ct = kernel.encrypt_ecb(data, sched, nr)
    assert ct == reference_ecb(key, data)
    assert kernel.decrypt_ecb(ct, sched, nr) == data


@pytest.mark.parametrize("key_len", [16, 24, 32])
def test_multi_key_kernel(kernel, key_len, rng):
    n = 21
    keys = rng.bytes(key_len * n)
    data = rng.bytes(16 * n)
    nr = {16: 10, 24: 12, 32: 14}[key_len]
    scheds = kernel.expand_keys(keys, key_len)
    ct = kernel.encrypt_multi(data, scheds, nr)
    expected = b"".join(
        reference_ecb(keys[i * key_len:(i + 1) * key_len], data[16 * i:16 * (i + 1)]) for i in range(n)
    )
    assert ct == expected
    assert kernel.decrypt_multi(ct, scheds, nr) == data


def test_kernels_raise_on_ragged_input(kernel):
    sched = kernel.expand_key(bytes(16))
    with pytest.raises(ValueError):
        kernel.encrypt_ecb(bytes(17), sched, 10)
    with pytest.raises(ValueError):
        kernel.encrypt_multi(bytes(32), sched, 10)


@pytest.mark.skipif("cython" not in available(), reason="compiled extension not built")
def test_backends_agree(rng):
    py, cy = available()["python"], available()["cython"]
    for key_len in (16, 24, 32):
        keys = rng.bytes(key_len * 8)
        data = rng.bytes(128)
        nr = {16: 10, 24: 12, 32: 14}[key_len]
        assert py.expand_keys(keys, key_len) == cy.expand_keys(keys, key_len)
        sched = py.expand_keys(keys, key_len)
        assert py.encrypt_multi(data, sched, nr) == cy.encrypt_multi(data, sched, nr)
        assert py.decrypt_multi(data, sched, nr) == cy.decrypt_multi(data, sched, nr)


def test_pure_python_override():
    env = dict(os.environ, QAES_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import qaes; print(qaes.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_numpy_buffers_accepted(kernel):
    key = np.arange(16, dtype=np.uint8).tobytes()
    sched = kernel.expand_key(key)
    assert len(sched) == 176
