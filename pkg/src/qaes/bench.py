"""Timing harness: plain AES against QAES, and BB84 key-generation profiles.

Every QAES repetition times two disjoint phases with a monotonic clock,
key generation (one live BB84 session producing the master key) and
encryption (key derivation plus AES), and stores
``t_total_ns = t_keygen_ns + t_encrypt_ns`` exactly.
"""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass, replace
from typing import Iterable, TextIO

import numpy as np

from qaes import aes, bb84
from qaes.bb84 import ChannelConfig
from qaes.errors import QberAbort
from qaes.mode import DerivedProvider, KeyMode, QaesConfig, qaes_decrypt, qaes_encrypt, session_seed

DEFAULT_SIZES_KB = (500, 1000, 1500, 2000, 3500)
KB = 1024

CSV_FIELDS = ("algorithm", "key_size", "input_kb", "rep", "t_keygen_us", "t_encrypt_us", "t_total_us")


@dataclass(frozen=True)
class BenchRecord:
    algorithm: str
    key_size_bits: int
    input_size_kb: int
    rep: int
    t_keygen_ns: int
    t_encrypt_ns: int
    t_total_ns: int
    repetitions: int
    timestamp: float

    def csv_row(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "key_size": self.key_size_bits,
            "input_kb": self.input_size_kb,
            "rep": self.rep,
            "t_keygen_us": f"{self.t_keygen_ns / 1000:.3f}",
            "t_encrypt_us": f"{self.t_encrypt_ns / 1000:.3f}",
            "t_total_us": f"{self.t_total_ns / 1000:.3f}",
        }


def _aes_once(data: bytes, key: bytes):
    t0 = time.perf_counter_ns()
    ct = aes.encrypt_ecb(data, key)
    t1 = time.perf_counter_ns()
    return 0, t1 - t0, ct


def _qaes_once(data: bytes, config: QaesConfig):
    t0 = time.perf_counter_ns()
    master = bb84.generate_key(config.key_size_bits, config.channel)
    t1 = time.perf_counter_ns()
    provider = DerivedProvider(master.to_bytes(), config.key_bytes)
    ct = qaes_encrypt(data, config, provider)
    t2 = time.perf_counter_ns()
    return t1 - t0, t2 - t1, (master, ct)


def _verify(algorithm: str, data: bytes, key: bytes, out, config: QaesConfig) -> None:
    blocks = -(-(len(data) + 1) // 16)
    if algorithm == "AES":
        ok = len(out) == 16 * blocks and aes.decrypt_ecb(out, key) == data
    else:
        master, ct = out
        receiver = DerivedProvider(master.to_bytes(receiver=True), config.key_bytes)
        ok = ct.block_count == blocks and qaes_decrypt(ct, config, receiver) == data
    if not ok:
        raise RuntimeError(f"{algorithm} round trip failed for a {len(data)}-byte input")


def run_benchmark(
    sizes_kb: Iterable[int] = DEFAULT_SIZES_KB,
    algorithms: Iterable[str] = ("AES", "QAES"),
    key_size_bits: int = 128,
    repetitions: int = 10,
    warmup: int = 3,
    seed: int = 0,
    channel: ChannelConfig | None = None,
    key_mode: KeyMode = KeyMode.PER_BLOCK,
    verify: bool = True,
) -> list[BenchRecord]:
    """Time each algorithm on a pseudorandom input of each size.

    Inputs and keys are drawn from ``seed``; each QAES repetition runs its own
    BB84 session seeded from (seed, rep). Every output is decrypted and
    compared with the input (outside the timed sections) when ``verify``.
    """
    sizes = list(sizes_kb)
    if any(s <= 0 for s in sizes):
        raise ValueError("input sizes must be positive")
    algorithms = [a.upper() for a in algorithms]
    if set(algorithms) - {"AES", "QAES"}:
        raise ValueError("algorithms must be AES and/or QAES")
    channel = channel or ChannelConfig(rng_seed=seed)
    rng = np.random.default_rng(seed)
    records = []
    for size in sizes:
        data = rng.bytes(size * KB)
        key = rng.bytes(key_size_bits // 8)
        for algorithm in algorithms:
            for i in range(warmup + repetitions):
                cfg = QaesConfig(key_size_bits, key_mode,
                                 replace(channel, rng_seed=session_seed(channel.rng_seed, i)))
                if algorithm == "AES":
                    t_kg, t_enc, out = _aes_once(data, key)
                else:
                    t_kg, t_enc, out = _qaes_once(data, cfg)
                if verify and i == warmup:
                    _verify(algorithm, data, key, out, cfg)
                if i < warmup:
                    continue
                records.append(BenchRecord(
                    algorithm, key_size_bits, size, i - warmup, t_kg, t_enc, t_kg + t_enc,
                    repetitions, time.time(),
                ))
    return records


@dataclass(frozen=True)
class BenchSummary:
    algorithm: str
    key_size_bits: int
    input_size_kb: int
    t_keygen_ns: float
    t_encrypt_ns: float
    t_total_ns: float


def summarize(records: Iterable[BenchRecord]) -> list[BenchSummary]:
    """Median timings per (algorithm, key size, input size)."""
    groups: dict[tuple, list[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.algorithm, r.key_size_bits, r.input_size_kb), []).append(r)
    out = []
    for (alg, ks, size), rs in sorted(groups.items()):
        out.append(BenchSummary(
            alg, ks, size,
            statistics.median(r.t_keygen_ns for r in rs),
            statistics.median(r.t_encrypt_ns for r in rs),
            statistics.median(r.t_total_ns for r in rs),
        ))
    return out


def write_csv(records: Iterable[BenchRecord], fh: TextIO) -> None:
    writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.csv_row())


def read_csv(fh: TextIO) -> list[dict]:
    return list(csv.DictReader(fh))


def write_plot_data(summary: Iterable[BenchSummary], fh: TextIO) -> None:
    """Whitespace-separated medians (milliseconds), one gnuplot index per algorithm."""
    by_alg: dict[str, list[BenchSummary]] = {}
    for s in summary:
        by_alg.setdefault(f"{s.algorithm}-{s.key_size_bits}", []).append(s)
    for n, (name, rows) in enumerate(sorted(by_alg.items())):
        if n:
            fh.write("\n\n")
        fh.write(f"# {name}\n# input_kb t_keygen_ms t_encrypt_ms t_total_ms\n")
        for s in rows:
            fh.write(f"{s.input_size_kb} {s.t_keygen_ns / 1e6:.6f} "
                     f"{s.t_encrypt_ns / 1e6:.6f} {s.t_total_ns / 1e6:.6f}\n")


@dataclass(frozen=True)
class ProfileRow:
    pulses: int | None
    target_bits: int | None
    noise_level: float
    eve_enabled: bool
    seed: int
    aborted: bool
    surviving_bits: int | None
    pulses_pumped: int
    qber: float
    t_qkg_ns: int


def _profile_one(config, pulses=None, target=None, **options) -> ProfileRow:
    t0 = time.perf_counter_ns()
    try:
        if target is not None:
            key = bb84.generate_key(target, config, **options)
        else:
            key = bb84.run_pulses(pulses, config, **options)
    except QberAbort as exc:
        return ProfileRow(pulses, target, config.noise_level, config.eve_enabled, config.rng_seed,
                          True, None, exc.pulses_pumped, exc.qber, time.perf_counter_ns() - t0)
    return ProfileRow(pulses, target, config.noise_level, config.eve_enabled, config.rng_seed,
                      False, len(key), key.pulses_pumped, key.qber_estimate,
                      time.perf_counter_ns() - t0)


def keygen_profile(
    qubit_budgets: Iterable[int] = (500,),
    noise_levels: Iterable[float] = (0.0, 0.05, 0.1),
    eve_settings: Iterable[bool] = (False, True),
    seeds: Iterable[int] = range(20),
    **bb84_options,
) -> list[ProfileRow]:
    """Surviving key length and T_qkg for fixed pulse budgets.

    Aborted sessions are kept as rows with ``aborted=True`` and no key.
    """
    seeds = list(seeds)
    rows = []
    for pulses in qubit_budgets:
        for noise in noise_levels:
            for eve in eve_settings:
                for s in seeds:
                    rows.append(_profile_one(ChannelConfig(noise, eve, s), pulses=pulses, **bb84_options))
    return rows


def keygen_target_profile(
    target_bits: int = 128,
    noise_levels: Iterable[float] = (0.0, 0.05, 0.1),
    eve_settings: Iterable[bool] = (False, True),
    seeds: Iterable[int] = range(20),
    **bb84_options,
) -> list[ProfileRow]:
    """Pulses pumped and T_qkg to reach ``target_bits`` under each configuration."""
    seeds = list(seeds)
    rows = []
    for noise in noise_levels:
        for eve in eve_settings:
            for s in seeds:
                rows.append(_profile_one(ChannelConfig(noise, eve, s), target=target_bits, **bb84_options))
    return rows


def profile_table(rows: Iterable[ProfileRow]) -> str:
    """Medians per configuration as an aligned text table."""
    groups: dict[tuple, list[ProfileRow]] = {}
    for r in rows:
        groups.setdefault((r.pulses, r.target_bits, r.noise_level, r.eve_enabled), []).append(r)
    buf = io.StringIO()
    buf.write(f"{'pulses':>7} {'target':>7} {'noise':>6} {'eve':>5} {'runs':>5} {'aborted':>8} "
              f"{'med_bits':>9} {'med_pumped':>11} {'med_qber':>9} {'med_tqkg_ms':>12}\n")
    for (pulses, target, noise, eve), rs in groups.items():
        ok = [r for r in rs if not r.aborted]
        bits = f"{statistics.median(r.surviving_bits for r in ok):.1f}" if ok else "-"
        pumped = f"{statistics.median(r.pulses_pumped for r in ok):.1f}" if ok else "-"
        buf.write(
            f"{pulses if pulses is not None else '-':>7} {target if target is not None else '-':>7} "
            f"{noise:>6.3f} {str(eve):>5} {len(rs):>5} {len(rs) - len(ok):>8} {bits:>9} {pumped:>11} "
            f"{statistics.median(r.qber for r in rs):>9.4f} "
            f"{statistics.median(r.t_qkg_ns for r in rs) / 1e6:>12.4f}\n"
        )
    return buf.getvalue()
