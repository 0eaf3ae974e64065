"""Run a selection of the randomness tests and write the verdict report."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, TextIO

from qaes.errors import QaesError
from qaes.nist.randomness import ALPHA, TEST_NAMES, TESTS, BitSequence, TestResult


@dataclass(frozen=True)
class SuiteReport:
    results: tuple[TestResult, ...]
    n: int

    @property
    def passed_count(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def all_passed(self) -> bool:
        return self.passed_count == self.total

    def result(self, name: str) -> TestResult:
        for r in self.results:
            if r.test_name == name:
                return r
        raise KeyError(name)

    def records(self) -> list[dict]:
        out = []
        for r in self.results:
            out.append({
                "test": r.test_name,
                "n": self.n,
                "statistics": _jsonable(r.statistics),
                "p_values": [float(p) for p in r.p_values],
                "verdict": "pass" if r.passed else ("error" if r.error else "reject"),
                "error": r.error,
            })
        return out

    def to_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.records())

    def summary_table(self) -> str:
        lines = [f"{'test':<26} {'p-value(s)':<20}  verdict", "-" * 56]
        for r in self.results:
            if r.error:
                lines.append(f"{r.test_name:<26} {'-':<20}  ERROR ({r.error})")
            else:
                shown = ", ".join(f"{p:.6f}" for p in r.p_values)
                lines.append(f"{r.test_name:<26} {shown:<20}  {'PASS' if r.passed else 'REJECT'}")
        lines.append("-" * 56)
        lines.append(f"{self.passed_count}/{self.total} tests passed at alpha = {ALPHA} (n = {self.n})")
        return "\n".join(lines) + "\n"

    def write(self, fh: TextIO) -> None:
        fh.write(self.to_jsonl())


def _jsonable(stats: dict) -> dict:
    out = {}
    for k, v in stats.items():
        if hasattr(v, "item"):
            v = v.item()
        out[k] = v
    return out


def run_suite(seq: BitSequence, selected: Iterable[str] | None = None,
              params: dict[str, dict] | None = None) -> SuiteReport:
    """Run ``selected`` tests (all twelve by default) in canonical order.

    A test that raises (sequence too short, failed prerequisite) is recorded
    as an error result and counts as not passed; the rest still run.
    ``params`` maps a test name to keyword overrides.
    """
    names = TEST_NAMES if selected is None else tuple(selected)
    unknown = set(names) - set(TESTS)
    if unknown:
        raise ValueError(f"unknown tests: {', '.join(sorted(unknown))}")
    params = params or {}
    results = []
    for name in TEST_NAMES:
        if name not in names:
            continue
        try:
            results.append(TESTS[name](seq, **params.get(name, {})))
        except QaesError as exc:
            results.append(TestResult(name, error=f"{type(exc).__name__}: {exc}"))
    return SuiteReport(tuple(results), seq.n)
