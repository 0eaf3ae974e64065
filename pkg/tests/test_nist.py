"""Worked examples from the SP 800-22 test descriptions, plus loop-based
reference implementations of each statistic used as independent oracles."""

import math

import numpy as np
import pytest
from scipy.special import erfc as sp_erfc
from scipy.special import gammaincc

from qaes.errors import PrerequisiteFailed, SequenceTooShort
from qaes.nist import TEST_NAMES, BitSequence, run_monobit, run_runs, run_suite
from qaes.nist import randomness as R

E100 = ("11001001000011111101101010100010001000010110100011000010001101"
        "00110001001100011001100010100010111000")
LR128 = ("11001100000101010110110001001100111000000000001001001101010100"
         "01000100111101011010000000110101111100110011100110110110001011"
         "0010")


def seq(text):
    return BitSequence.from_string(text)


def random_seq(seed, n):
    return BitSequence.from_bits(np.random.default_rng(seed).integers(0, 2, n, dtype=np.uint8))


# ---- worked examples ---------------------------------------------------

def test_monobit_example():
    assert run_monobit(seq("1011010101"), min_n=1).p_value == pytest.approx(0.527089, abs=1e-6)
    assert R.frequency(seq(E100)).p_value == pytest.approx(0.109599, abs=1e-6)


def test_block_frequency_examples():
    assert R.block_frequency(seq("0110011010"), 3, min_n=1).p_value == pytest.approx(0.801252, abs=1e-6)
    assert R.block_frequency(seq(E100), 10).p_value == pytest.approx(0.706438, abs=1e-6)


def test_cumulative_sums_examples():
    r = R.cumulative_sums(seq("1011010111"), min_n=1)
    assert r.statistics["z_forward"] == 4
    assert r.p_values[0] == pytest.approx(0.4116588, abs=1e-6)
    fwd, rev = R.cumulative_sums(seq(E100)).p_values
    assert fwd == pytest.approx(0.219194, abs=1e-6)
    assert rev == pytest.approx(0.114866, abs=1e-6)


def test_runs_examples():
    r = run_runs(seq("1001101011"), min_n=1)
    assert r.statistics["v_obs"] == 7
    assert r.p_value == pytest.approx(0.147232, abs=1e-6)
    assert R.runs(seq(E100)).p_value == pytest.approx(0.500798, abs=1e-6)


def test_longest_run_example():
    r = R.longest_run_of_ones(seq(LR128))
    assert r.statistics["counts"] == [4, 9, 3, 0]
    # the published value was computed with rounded intermediate terms
    assert r.p_value == pytest.approx(0.180609, abs=1e-4)


def test_approximate_entropy_examples():
    assert R.approximate_entropy(seq("0100110101"), 3, min_n=1).p_value == pytest.approx(0.261961, abs=1e-6)
    assert R.approximate_entropy(seq(E100), 2).p_value == pytest.approx(0.235301, abs=1e-6)


def test_serial_example():
    r = R.serial(seq("0011011101"), 3, min_n=1)
    assert r.p_values[0] == pytest.approx(0.808792, abs=1e-6)
    assert r.p_values[1] == pytest.approx(0.670320, abs=1e-6)


def test_non_overlapping_example():
    r = R.non_overlapping_template(seq("10100100101110010110"), "001", blocks=2)
    assert r.statistics["counts"] == [2, 1]
    assert r.p_value == pytest.approx(0.344154, abs=1e-6)


def test_universal_example_statistic():
    r = R.universal(seq("01011010011101010111"), block_len=2, init_blocks=4)
    assert r.statistics["fn"] == pytest.approx(1.1949875, abs=1e-7)


# ---- loop-based oracles ------------------------------------------------

def naive_longest_runs(bits, m):
    out = []
    for b in range(len(bits) // m):
        best = cur = 0
        for x in bits[b * m:(b + 1) * m]:
            cur = cur + 1 if x else 0
            best = max(best, cur)
        out.append(best)
    return out


def naive_rank(matrix):
    rows = [int("".join(map(str, r)), 2) for r in matrix]
    rank = 0
    for col in reversed(range(len(matrix[0]))):
        pivot = next((i for i in range(rank, len(rows)) if rows[i] >> col & 1), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] >> col & 1:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


def naive_pattern_counts(bits, m):
    ext = list(bits) + list(bits[: m - 1])
    counts = {}
    for i in range(len(bits)):
        key = tuple(ext[i:i + m])
        counts[key] = counts.get(key, 0) + 1
    return counts


def test_longest_runs_match_loops():
    bits = random_seq(1, 8 * 4000).bits
    blocks = np.asarray(bits).reshape(-1, 8)
    assert R._longest_runs(blocks).tolist() == naive_longest_runs(list(bits), 8)
    bits = random_seq(2, 128 * 300).bits
    assert R._longest_runs(np.asarray(bits).reshape(-1, 128)).tolist() == naive_longest_runs(list(bits), 128)


def test_gf2_rank_matches_elimination():
    rng = np.random.default_rng(3)
    mats = rng.integers(0, 2, size=(200, 32, 32))
    mats[0] = 0
    mats[1] = np.eye(32, dtype=int)
    mats[2, 5] = mats[2, 7]
    weights = 1 << np.arange(31, -1, -1, dtype=np.uint64)
    packed = (mats.astype(np.uint64) * weights).sum(axis=2, dtype=np.uint64)
    ranks = R.gf2_ranks(packed, 32)
    assert ranks.tolist() == [naive_rank(m.tolist()) for m in mats]
    assert ranks[0] == 0 and ranks[1] == 32 and ranks[2] <= 31


def test_rank_probabilities():
    full, minus_one, rest = R._rank_probabilities(32, 32)
    assert full == pytest.approx(0.2888, abs=1e-4)
    assert minus_one == pytest.approx(0.5776, abs=1e-4)
    assert rest == pytest.approx(0.1336, abs=1e-4)


def test_spectral_matches_direct_dft():
    bits = np.asarray(random_seq(4, 1200).bits, dtype=float)
    n = bits.shape[0]
    x = 2 * bits - 1
    k = np.arange(n)
    moduli = [abs(np.sum(x * np.exp(-2j * np.pi * j * k / n))) for j in range(n // 2)]
    t = math.sqrt(math.log(20) * n)
    n1 = sum(m < t for m in moduli)
    d = (n1 - 0.95 * n / 2) / math.sqrt(n * 0.95 * 0.05 / 4)
    r = R.spectral(BitSequence.from_bits(bits.astype(np.uint8)))
    assert r.statistics["n1"] == n1
    assert r.p_value == pytest.approx(sp_erfc(abs(d) / math.sqrt(2)), abs=1e-10)


def test_serial_and_apen_match_pattern_counts():
    s = random_seq(5, 5000)
    bits = list(s.bits)
    n = len(bits)

    def psi2(m):
        if m == 0:
            return 0.0
        return 2 ** m / n * sum(c * c for c in naive_pattern_counts(bits, m).values()) - n

    def phi(m):
        return sum(c / n * math.log(c / n) for c in naive_pattern_counts(bits, m).values())

    m = 4
    d1 = psi2(m) - psi2(m - 1)
    d2 = psi2(m) - 2 * psi2(m - 1) + psi2(m - 2)
    r = R.serial(s, m)
    assert r.p_values[0] == pytest.approx(gammaincc(2 ** (m - 2), d1 / 2), abs=1e-9)
    assert r.p_values[1] == pytest.approx(gammaincc(2 ** (m - 3), d2 / 2), abs=1e-9)
    apen = phi(m) - phi(m + 1)
    r = R.approximate_entropy(s, m)
    assert r.statistics["apen"] == pytest.approx(apen, abs=1e-12)
    assert r.p_value == pytest.approx(gammaincc(2 ** (m - 1), n * (math.log(2) - apen)), abs=1e-9)


def test_template_counts_match_scan():
    s = random_seq(6, 8 * 2000)
    bits = list(s.bits)
    template = [0, 0, 1, 1]
    r = R.non_overlapping_template(s, "0011", blocks=8)
    expected = []
    for b in range(8):
        block = bits[b * 2000:(b + 1) * 2000]
        i = count = 0
        while i <= len(block) - 4:
            if block[i:i + 4] == template:
                count += 1
                i += 4
            else:
                i += 1
        expected.append(count)
    assert r.statistics["counts"] == expected


def test_overlapping_counts_match_scan():
    s = random_seq(7, 1032 * 60)
    bits = list(s.bits)
    classes = [0] * 6
    for b in range(60):
        block = bits[b * 1032:(b + 1) * 1032]
        hits = sum(all(block[i:i + 9]) for i in range(1032 - 8))
        classes[min(hits, 5)] += 1
    assert R.overlapping_template(s).statistics["counts"] == classes


def test_universal_matches_table_walk():
    s = random_seq(8, 30_000)
    L, Q = 4, 160
    bits = list(s.bits)
    blocks = [int("".join(map(str, bits[i * L:(i + 1) * L])), 2) for i in range(len(bits) // L)]
    last = {}
    for i in range(Q):
        last[blocks[i]] = i + 1
    total = 0.0
    for i in range(Q, len(blocks)):
        total += math.log2(i + 1 - last.get(blocks[i], 0))
        last[blocks[i]] = i + 1
    r = R.universal(s, block_len=L, init_blocks=Q)
    assert r.statistics["fn"] == pytest.approx(total / (len(blocks) - Q), abs=1e-12)


def test_block_frequency_and_runs_formulas():
    s = random_seq(9, 10_000)
    bits = np.asarray(s.bits, dtype=float)
    pi = bits[: 78 * 128].reshape(78, 128).mean(axis=1)
    chi2 = 4 * 128 * ((pi - 0.5) ** 2).sum()
    assert R.block_frequency(s).p_value == pytest.approx(gammaincc(78 / 2, chi2 / 2), abs=1e-10)
    p1 = bits.mean()
    v = 1 + sum(bits[i] != bits[i + 1] for i in range(len(bits) - 1))
    expected = sp_erfc(abs(v - 2 * len(bits) * p1 * (1 - p1)) / (2 * math.sqrt(2 * len(bits)) * p1 * (1 - p1)))
    assert R.runs(s).p_value == pytest.approx(expected, abs=1e-10)


# ---- behaviour ---------------------------------------------------------

@pytest.mark.parametrize("name", ["frequency", "block_frequency", "runs", "approximate_entropy",
                                  "serial", "cumulative_sums"])
def test_complement_invariance(name):
    s = random_seq(10, 20_000)
    params = {"approximate_entropy": {"m": 4}, "serial": {"m": 5}}.get(name, {})
    a = R.TESTS[name](s, **params)
    b = R.TESTS[name](s.complement(), **params)
    assert a.p_values == pytest.approx(b.p_values, abs=1e-9)


def test_all_zeros_fail():
    s = BitSequence.from_bytes(bytes(20_000))
    assert not R.frequency(s).passed
    with pytest.raises(PrerequisiteFailed):
        R.runs(s)


def test_counter_sequence_rejected():
    data = np.arange(40_000, dtype=">u2").tobytes()
    s = BitSequence.from_bytes(data)
    assert not R.serial(s, 5).passed
    assert not R.approximate_entropy(s, 5).passed


def test_short_sequences_refused():
    with pytest.raises(SequenceTooShort):
        R.frequency(seq("1011010101"))
    with pytest.raises(SequenceTooShort):
        R.universal(random_seq(1, 10_000))
    with pytest.raises(SequenceTooShort):
        R.binary_matrix_rank(random_seq(1, 1000))


def test_bit_sequence_packing():
    s = BitSequence.from_bytes(b"\xa5\x0f", 12)
    assert s.bits.tolist() == [1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0]
    assert BitSequence.from_string("1 0 1\n1").bits.tolist() == [1, 0, 1, 1]
    with pytest.raises(ValueError):
        BitSequence.from_bytes(b"\x00", 9)


def test_suite_on_random_bits_passes():
    report = run_suite(random_seq(11, 1_000_000))
    assert report.total == 12
    assert [r.test_name for r in report.results] == list(TEST_NAMES)
    assert report.passed_count >= 11


def test_suite_records_errors_and_keeps_going():
    report = run_suite(BitSequence.from_bytes(bytes(125_000)), ["frequency", "runs", "serial"])
    assert report.result("runs").error.startswith("PrerequisiteFailed")
    assert not report.result("runs").passed
    assert report.total == 3
    lines = report.to_jsonl().splitlines()
    assert len(lines) == 3 and '"verdict": "error"' in lines[1]
    assert "0/3 tests passed" in report.summary_table()


def test_suite_rejects_unknown_names():
    with pytest.raises(ValueError):
        run_suite(random_seq(1, 1000), ["nope"])
