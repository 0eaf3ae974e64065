"""Twelve NIST SP 800-22 statistical tests over a single bit sequence.

Every test takes a ``BitSequence`` and returns a ``TestResult``; parameters
default to the values NIST recommends for n = 10^6 and can be overridden.
A sequence fails a test when any of its p-values is below ``ALPHA``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qaes.errors import PrerequisiteFailed, SequenceTooShort
from qaes.nist.special import erfc, igamc, normal_cdf

ALPHA = 0.01


@dataclass(frozen=True)
class BitSequence:
    """Packed bit string of length n (most significant bit first)."""

    packed: bytes
    n: int

    def __post_init__(self):
        if self.n <= 0:
            raise SequenceTooShort("bit sequence must be non-empty")
        if self.n > 8 * len(self.packed):
            raise ValueError("length exceeds the packed data")

    @classmethod
    def from_bits(cls, bits) -> BitSequence:
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        return cls(np.packbits(bits).tobytes(), int(bits.shape[0]))

    @classmethod
    def from_bytes(cls, data: bytes, n: int | None = None) -> BitSequence:
        data = bytes(data)
        return cls(data, 8 * len(data) if n is None else n)

    @classmethod
    def from_string(cls, text: str) -> BitSequence:
        return cls.from_bits([int(c) for c in text if c in "01"])

    @property
    def bits(self) -> np.ndarray:
        arr = np.unpackbits(np.frombuffer(self.packed, dtype=np.uint8), count=self.n)
        arr.flags.writeable = False
        return arr

    def __len__(self):
        return self.n

    def complement(self) -> BitSequence:
        return BitSequence.from_bits(1 - self.bits)


@dataclass(frozen=True)
class TestResult:
    test_name: str
    statistics: dict = field(default_factory=dict)
    p_values: tuple[float, ...] = ()
    error: str | None = None

    __test__ = False  # not a pytest class

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.p_values) and all(p >= ALPHA for p in self.p_values)

    @property
    def p_value(self) -> float:
        return min(self.p_values)


def _require(seq: BitSequence, minimum: int, name: str) -> np.ndarray:
    if seq.n < minimum:
        raise SequenceTooShort(f"{name} needs n >= {minimum}, got {seq.n}")
    return seq.bits.astype(np.int64)


def _clip(p: float) -> float:
    return min(1.0, max(0.0, p))


def frequency(seq: BitSequence, min_n: int = 100) -> TestResult:
    bits = _require(seq, min_n, "frequency")
    n = bits.shape[0]
    s = int(2 * bits.sum() - n)
    p = erfc(abs(s) / math.sqrt(2.0 * n))
    return TestResult("frequency", {"s_n": s, "s_obs": abs(s) / math.sqrt(n)}, (_clip(p),))


def block_frequency(seq: BitSequence, block_size: int = 128, min_n: int = 100) -> TestResult:
    bits = _require(seq, min_n, "block_frequency")
    m = block_size
    n_blocks = bits.shape[0] // m
    if n_blocks == 0:
        raise SequenceTooShort("sequence shorter than one block")
    pi = bits[: n_blocks * m].reshape(n_blocks, m).mean(axis=1)
    chi2 = 4.0 * m * float(((pi - 0.5) ** 2).sum())
    p = igamc(n_blocks / 2.0, chi2 / 2.0)
    return TestResult("block_frequency", {"chi2": chi2, "blocks": n_blocks}, (_clip(p),))


def _cusum_p(z: int, n: int) -> float:
    # summation bounds use C integer division (truncation toward zero)
    def tdiv(a, b):
        q = abs(a) // abs(b)
        return q if (a >= 0) == (b >= 0) else -q

    sqrt_n = math.sqrt(n)
    total = 1.0
    for k in range(tdiv(tdiv(-n, z) + 1, 4), tdiv(tdiv(n, z) - 1, 4) + 1):
        total -= normal_cdf((4 * k + 1) * z / sqrt_n) - normal_cdf((4 * k - 1) * z / sqrt_n)
    for k in range(tdiv(tdiv(-n, z) - 3, 4), tdiv(tdiv(n, z) - 1, 4) + 1):
        total += normal_cdf((4 * k + 3) * z / sqrt_n) - normal_cdf((4 * k + 1) * z / sqrt_n)
    return _clip(total)


def cumulative_sums(seq: BitSequence, min_n: int = 100) -> TestResult:
    """Forward and reverse cumulative-sum excursions; two p-values."""
    bits = _require(seq, min_n, "cumulative_sums")
    n = bits.shape[0]
    x = 2 * bits - 1
    z_fwd = int(np.abs(np.cumsum(x)).max())
    z_rev = int(np.abs(np.cumsum(x[::-1])).max())
    p = (_cusum_p(z_fwd, n), _cusum_p(z_rev, n))
    return TestResult("cumulative_sums", {"z_forward": z_fwd, "z_reverse": z_rev}, p)


def runs(seq: BitSequence, min_n: int = 100) -> TestResult:
    """Total number of runs; requires the frequency prerequisite."""
    bits = _require(seq, min_n, "runs")
    n = bits.shape[0]
    pi = bits.mean()
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        raise PrerequisiteFailed(f"runs: ones fraction {pi:.4f} fails the frequency prerequisite")
    v = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
    pi = float(pi)
    num = abs(v - 2.0 * n * pi * (1 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1 - pi)
    return TestResult("runs", {"v_obs": v, "pi": pi}, (_clip(erfc(num / den)),))


_LONGEST_RUN_TABLES = {
    # block size: (lowest class, highest class, class probabilities)
    8: (1, 4, (0.2148, 0.3672, 0.2305, 0.1875)),
    128: (4, 9, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    10_000: (10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
}


def _longest_runs(blocks: np.ndarray) -> np.ndarray:
    # per block: locate run boundaries in the flattened, zero-separated row
    rows, m = blocks.shape
    padded = np.zeros((rows, m + 2), dtype=np.int8)
    padded[:, 1:-1] = blocks
    diff = np.diff(padded, axis=1)
    r_start, c_start = np.nonzero(diff == 1)
    _, c_end = np.nonzero(diff == -1)
    lengths = c_end - c_start
    longest = np.zeros(rows, dtype=np.int64)
    np.maximum.at(longest, r_start, lengths)
    return longest


def longest_run_of_ones(seq: BitSequence, block_size: int | None = None) -> TestResult:
    bits = _require(seq, 128, "longest_run_of_ones")
    n = bits.shape[0]
    if block_size is None:
        block_size = 8 if n < 6272 else 128 if n < 750_000 else 10_000
    lo, hi, probs = _LONGEST_RUN_TABLES[block_size]
    n_blocks = n // block_size
    blocks = bits[: n_blocks * block_size].reshape(n_blocks, block_size)
    longest = _longest_runs(blocks)
    classes = np.clip(longest, lo, hi) - lo
    counts = np.bincount(classes, minlength=hi - lo + 1)
    expected = n_blocks * np.asarray(probs)
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    k = len(probs) - 1
    return TestResult(
        "longest_run_of_ones",
        {"chi2": chi2, "block_size": block_size, "counts": counts.tolist()},
        (_clip(igamc(k / 2.0, chi2 / 2.0)),),
    )


def _rank_probabilities(m: int, q: int) -> tuple[float, float, float]:
    def prob(r):
        prod = 1.0
        for i in range(r):
            prod *= (1 - 2.0 ** (i - q)) * (1 - 2.0 ** (i - m)) / (1 - 2.0 ** (i - r))
        return 2.0 ** (r * (q + m - r) - m * q) * prod

    full = prob(m)
    minus_one = prob(m - 1)
    return full, minus_one, 1.0 - full - minus_one


def gf2_ranks(rows: np.ndarray, width: int) -> np.ndarray:
    """GF(2) rank of many matrices at once.

    ``rows`` has shape (matrices, row_count); each entry packs one row into
    the low ``width`` bits of an unsigned integer.
    """
    rows = rows.astype(np.uint64).copy()
    count, height = rows.shape
    used = np.zeros((count, height), dtype=bool)
    rank = np.zeros(count, dtype=np.int64)
    idx = np.arange(count)
    row_ids = np.arange(height)
    for col in range(width - 1, -1, -1):
        bit = np.uint64(1 << col)
        has_bit = (rows & bit) != 0
        candidates = has_bit & ~used
        found = candidates.any(axis=1)
        if not found.any():
            continue
        pivot = candidates.argmax(axis=1)
        pivot_row = rows[idx, pivot]
        clear = has_bit & (row_ids[None, :] != pivot[:, None]) & found[:, None]
        rows ^= np.where(clear, pivot_row[:, None], np.uint64(0))
        used[idx[found], pivot[found]] = True
        rank += found
    return rank


def binary_matrix_rank(seq: BitSequence, rows: int = 32, cols: int = 32) -> TestResult:
    bits = _require(seq, 38 * rows * cols, "binary_matrix_rank")
    size = rows * cols
    n_mat = bits.shape[0] // size
    mats = bits[: n_mat * size].reshape(n_mat, rows, cols).astype(np.uint64)
    weights = np.uint64(1) << np.arange(cols - 1, -1, -1, dtype=np.uint64)
    packed = (mats * weights).sum(axis=2, dtype=np.uint64)
    ranks = gf2_ranks(packed, cols)
    full = int(np.count_nonzero(ranks == min(rows, cols)))
    minus_one = int(np.count_nonzero(ranks == min(rows, cols) - 1))
    rest = n_mat - full - minus_one
    p_full, p_minus, p_rest = _rank_probabilities(min(rows, cols), max(rows, cols))
    chi2 = (
        (full - p_full * n_mat) ** 2 / (p_full * n_mat)
        + (minus_one - p_minus * n_mat) ** 2 / (p_minus * n_mat)
        + (rest - p_rest * n_mat) ** 2 / (p_rest * n_mat)
    )
    return TestResult(
        "binary_matrix_rank",
        {"chi2": chi2, "matrices": n_mat, "full": full, "full_minus_one": minus_one},
        (_clip(math.exp(-chi2 / 2.0)),),
    )


def spectral(seq: BitSequence, min_n: int = 1000) -> TestResult:
    """Discrete Fourier transform test for periodic features."""
    bits = _require(seq, min_n, "spectral")
    n = bits.shape[0]
    x = 2.0 * bits - 1.0
    modulus = np.abs(np.fft.fft(x)[: n // 2])
    threshold = math.sqrt(math.log(1 / 0.05) * n)
    n0 = 0.95 * n / 2.0
    n1 = int(np.count_nonzero(modulus < threshold))
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    return TestResult("spectral", {"d": d, "n1": n1}, (_clip(erfc(abs(d) / math.sqrt(2.0))),))


def _windows(bits: np.ndarray, m: int, wrap: bool = False) -> np.ndarray:
    """Integer value of every overlapping m-bit window (optionally cyclic)."""
    if wrap:
        bits = np.concatenate([bits, bits[: m - 1]])
    count = bits.shape[0] - m + 1
    vals = np.zeros(count, dtype=np.int64)
    for j in range(m):
        vals = (vals << 1) | bits[j:j + count]
    return vals


def _template_value(template: str) -> int:
    if not template or set(template) - {"0", "1"}:
        raise ValueError(f"template must be a non-empty 0/1 string, got {template!r}")
    return int(template, 2)


def non_overlapping_template(seq: BitSequence, template: str = "000000001",
                             blocks: int = 8) -> TestResult:
    """Count non-overlapping occurrences of ``template`` in each of ``blocks`` blocks."""
    m = len(template)
    target = _template_value(template)
    bits = _require(seq, blocks * m, "non_overlapping_template")
    block_len = bits.shape[0] // blocks
    counts = []
    for b in range(blocks):
        block = bits[b * block_len:(b + 1) * block_len]
        hits = np.flatnonzero(_windows(block, m) == target)
        count, next_free = 0, 0
        for pos in hits:
            if pos >= next_free:
                count += 1
                next_free = pos + m
        counts.append(count)
    counts = np.asarray(counts, dtype=float)
    mu = (block_len - m + 1) / 2.0 ** m
    var = block_len * (1 / 2.0 ** m - (2 * m - 1) / 2.0 ** (2 * m))
    chi2 = float(((counts - mu) ** 2).sum() / var)
    return TestResult(
        "non_overlapping_template",
        {"chi2": chi2, "template": template, "counts": counts.astype(int).tolist()},
        (_clip(igamc(blocks / 2.0, chi2 / 2.0)),),
    )


# class probabilities for m = 9, M = 1032, K = 5 (NIST reference implementation)
_OVERLAPPING_PI = (0.364091, 0.185659, 0.139381, 0.100571, 0.070432, 0.139865)


def overlapping_template(seq: BitSequence, m: int = 9, block_len: int = 1032) -> TestResult:
    """Overlapping occurrences of the all-ones template of length ``m`` per block."""
    bits = _require(seq, block_len, "overlapping_template")
    n_blocks = bits.shape[0] // block_len
    if n_blocks == 0:
        raise SequenceTooShort("sequence shorter than one block")
    k = len(_OVERLAPPING_PI) - 1
    target = (1 << m) - 1
    blocks = bits[: n_blocks * block_len].reshape(n_blocks, block_len)
    windows = np.zeros((n_blocks, block_len - m + 1), dtype=np.int64)
    for j in range(m):
        windows = (windows << 1) | blocks[:, j:j + block_len - m + 1]
    hits = np.count_nonzero(windows == target, axis=1)
    counts = np.bincount(np.minimum(hits, k), minlength=k + 1)
    expected = n_blocks * np.asarray(_OVERLAPPING_PI)
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    return TestResult(
        "overlapping_template",
        {"chi2": chi2, "blocks": n_blocks, "counts": counts.tolist()},
        (_clip(igamc(k / 2.0, chi2 / 2.0)),),
    )


_UNIVERSAL_MIN_N = (
    (6, 387_840), (7, 904_960), (8, 2_068_480), (9, 4_654_080), (10, 10_342_400),
    (11, 22_753_280), (12, 49_643_520), (13, 107_560_960), (14, 231_669_760),
    (15, 496_435_200), (16, 1_059_061_760),
)
_UNIVERSAL_EXPECTED = (
    0, 0.7326495, 1.5374383, 2.4016068, 3.3112247, 4.2534266, 5.2177052, 6.1962507,
    7.1836656, 8.1764248, 9.1723243, 10.170032, 11.168765, 12.168070, 13.167693,
    14.167488, 15.167379,
)
_UNIVERSAL_VARIANCE = (
    0, 0.690, 1.338, 1.901, 2.358, 2.705, 2.954, 3.125, 3.238, 3.311, 3.356, 3.384,
    3.401, 3.410, 3.416, 3.419, 3.421,
)


def universal(seq: BitSequence, block_len: int | None = None, init_blocks: int | None = None) -> TestResult:
    """Maurer's universal statistical test (compressibility)."""
    n = seq.n
    if block_len is None:
        fitting = [L for L, need in _UNIVERSAL_MIN_N if n >= need]
        if not fitting:
            raise SequenceTooShort(f"universal needs n >= {_UNIVERSAL_MIN_N[0][1]}, got {n}")
        block_len = fitting[-1]
    L = block_len
    q = 10 * 2 ** L if init_blocks is None else init_blocks
    bits = _require(seq, (q + 1) * L, "universal")
    total_blocks = bits.shape[0] // L
    k = total_blocks - q
    if k <= 0:
        raise SequenceTooShort("no test blocks after the initialization segment")
    values = bits[: total_blocks * L].reshape(total_blocks, L)
    values = (values << np.arange(L - 1, -1, -1)).sum(axis=1)
    positions = np.arange(1, total_blocks + 1)
    # previous occurrence of each block value: neighbour in a stable sort by value
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    prev = np.zeros(total_blocks, dtype=np.int64)
    same = sorted_vals[1:] == sorted_vals[:-1]
    prev[order[1:][same]] = positions[order[:-1][same]]
    test = slice(q, total_blocks)
    fn = float(np.log2(positions[test] - prev[test]).sum() / k)
    c = 0.7 - 0.8 / L + (4 + 32 / L) * k ** (-3 / L) / 15
    sigma = c * math.sqrt(_UNIVERSAL_VARIANCE[L] / k)
    p = erfc(abs(fn - _UNIVERSAL_EXPECTED[L]) / (math.sqrt(2.0) * sigma))
    return TestResult("universal", {"fn": fn, "L": L, "Q": q, "K": k}, (_clip(p),))


def _phi(bits: np.ndarray, m: int) -> float:
    n = bits.shape[0]
    if m == 0:
        return 0.0
    counts = np.bincount(_windows(bits, m, wrap=True), minlength=2 ** m)
    c = counts[counts > 0] / n
    return float((c * np.log(c)).sum())


def approximate_entropy(seq: BitSequence, m: int = 10, min_n: int = 100) -> TestResult:
    bits = _require(seq, min_n, "approximate_entropy")
    n = bits.shape[0]
    apen = _phi(bits, m) - _phi(bits, m + 1)
    chi2 = 2.0 * n * (math.log(2) - apen)
    p = igamc(2.0 ** (m - 1), chi2 / 2.0)
    return TestResult("approximate_entropy", {"apen": apen, "chi2": chi2, "m": m}, (_clip(p),))


def _psi2(bits: np.ndarray, m: int) -> float:
    n = bits.shape[0]
    if m <= 0:
        return 0.0
    counts = np.bincount(_windows(bits, m, wrap=True), minlength=2 ** m).astype(float)
    return float(2.0 ** m / n * (counts ** 2).sum() - n)


def serial(seq: BitSequence, m: int = 16, min_n: int | None = None) -> TestResult:
    """Frequencies of all overlapping m-bit patterns; two p-values.

    By default n must satisfy m < floor(log2 n) - 2.
    """
    if m < 2:
        raise ValueError("serial needs m >= 2")
    bits = _require(seq, 2 ** (m + 3) if min_n is None else min_n, "serial")
    n = bits.shape[0]
    p0, p1, p2 = _psi2(bits, m), _psi2(bits, m - 1), _psi2(bits, m - 2)
    d1 = p0 - p1
    d2 = p0 - 2 * p1 + p2
    pv = (_clip(igamc(2.0 ** (m - 2), d1 / 2.0)), _clip(igamc(2.0 ** (m - 3), d2 / 2.0)))
    return TestResult("serial", {"del1": d1, "del2": d2, "m": m}, pv)


TESTS = {
    "frequency": frequency,
    "block_frequency": block_frequency,
    "cumulative_sums": cumulative_sums,
    "runs": runs,
    "longest_run_of_ones": longest_run_of_ones,
    "binary_matrix_rank": binary_matrix_rank,
    "spectral": spectral,
    "non_overlapping_template": non_overlapping_template,
    "overlapping_template": overlapping_template,
    "universal": universal,
    "approximate_entropy": approximate_entropy,
    "serial": serial,
}

# names used in reports and on the command line, in the order they run
TEST_NAMES = tuple(TESTS)


def run_monobit(seq: BitSequence, min_n: int = 100) -> TestResult:
    return frequency(seq, min_n=min_n)


def run_runs(seq: BitSequence, min_n: int = 100) -> TestResult:
    return runs(seq, min_n=min_n)
