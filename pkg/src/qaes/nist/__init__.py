"""Statistical randomness testing (NIST SP 800-22 subset)."""

from qaes.nist.randomness import (
    ALPHA,
    TEST_NAMES,
    TESTS,
    BitSequence,
    TestResult,
    run_monobit,
    run_runs,
)
from qaes.nist.suite import SuiteReport, run_suite

__all__ = [
    "ALPHA",
    "TEST_NAMES",
    "TESTS",
    "BitSequence",
    "SuiteReport",
    "TestResult",
    "run_monobit",
    "run_runs",
    "run_suite",
]
