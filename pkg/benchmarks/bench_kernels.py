"""Compare the compiled and pure-Python AES kernels.

    python3 benchmarks/bench_kernels.py [--kib 64] [--repeat 5]

Times single-key ECB, key expansion, and per-block multi-key encryption
(the QAES hot path) for every importable backend and prints MB/s.
"""

import argparse
import time

import numpy as np

from qaes._backend import available


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kib", type=int, default=64, help="input size in KiB")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    data = rng.bytes(args.kib * 1024)
    blocks = len(data) // 16
    keys = rng.bytes(16 * blocks)
    results = {}
    for name, k in sorted(available().items()):
        sched = k.expand_key(keys[:16])
        scheds = k.expand_keys(keys, 16)
        results[name] = {
            "ecb": best_of(lambda: k.encrypt_ecb(data, sched, 10), args.repeat),
            "expand": best_of(lambda: k.expand_keys(keys, 16), args.repeat),
            "multi": best_of(lambda: k.encrypt_multi(data, scheds, 10), args.repeat),
        }
        assert k.decrypt_multi(k.encrypt_multi(data, scheds, 10), scheds, 10) == data

    mb = len(data) / 1e6
    print(f"{'backend':<8} {'ecb MB/s':>10} {'expand keys/s':>14} {'multi MB/s':>11}")
    for name, r in results.items():
        print(f"{name:<8} {mb / r['ecb']:>10.2f} {blocks / r['expand']:>14.0f} {mb / r['multi']:>11.2f}")
    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        print("speedup  " + "  ".join(f"{op}={py[op] / cy[op]:.0f}x" for op in py))


if __name__ == "__main__":
    main()
