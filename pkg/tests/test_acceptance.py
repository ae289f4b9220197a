"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records one ``CRITERION n: PASS|FAIL`` line (printed in the
terminal summary) plus the individual measured checks.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from holodot.verification import ACCEPTANCE

RESULTS: dict[int, str] = {}


def record(number: int, title: str, lines: list[str], ok: bool) -> None:
    status = "PASS" if ok else "FAIL"
    RESULTS[number] = f"CRITERION {number:>2}: {status}  {title}"
    for line in lines:
        RESULTS[number] += f"\n      {line}"
    print(RESULTS[number])


@pytest.mark.parametrize("number,title,fn", [
    (i + 1, label.split(" ", 1)[1], fn) for i, (label, fn) in enumerate(ACCEPTANCE)],
    ids=[label.replace(" ", "_") for label, _ in ACCEPTANCE])
def test_criterion(number, title, fn):
    checks = fn(1e-10, np.random.default_rng(0))
    ok = all(c.passed for c in checks)
    record(number, title, [c.line() for c in checks], ok)
    assert ok, "\n".join(c.line() for c in checks if not c.passed)


def test_criterion_10_full_suite_under_five_minutes(tmp_path):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "holodot", "verify-all",
                           "--output", str(tmp_path)], capture_output=True, text=True,
                          timeout=600)
    elapsed = time.perf_counter() - start
    report = json.loads((tmp_path / "report.json").read_text())
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    ok = proc.returncode == 0 and not failed and elapsed < 300
    record(10, "full verify-all suite under 5 minutes",
           [f"{len(report['checks'])} checks, {len(failed)} failed, {elapsed:.1f} s < 300 s"], ok)
    assert ok, proc.stdout[-2000:] + proc.stderr[-2000:]
