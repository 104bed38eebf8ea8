"""Acceptance criteria 1 to 9, one test each.

Every test prints a single PASS/FAIL line; the same lines are repeated in
the terminal summary. Reports are serialized with the package's
deterministic JSON writer and kept for the determinism check.
"""

import pytest

from acceptance_runs import RUNNERS, timed
from conftest import record
from kskeleton.serialize import dumps

REPORTS = {}


def _run(key):
    fn, *args = RUNNERS[key]
    (passed, report), seconds = timed(fn, *args)
    REPORTS[key] = dumps(report)
    return passed, report, seconds


def test_criterion_1_shift_index_law():
    passed, report, seconds = _run(1)
    ok = passed and seconds < 10
    values = [r["index"] for r in report["shifts"]]
    record(1, ok, f"indices {values} for n=-5..5, all stabilized by 256, {seconds:.2f}s < 10s")
    assert ok


def test_criterion_2_oracle_agreement():
    passed, report, seconds = _run(2)
    ok = passed and seconds < 120
    record(2, ok, f"{report['agreement']}/{report['total']} symbols agree, {seconds:.1f}s < 120s")
    assert ok


def test_criterion_3_factorization_residual():
    passed, report, seconds = _run(3)
    worst = max(c["residual"] for c in report["cases"])
    worst2 = max(c["residual_doubled"] for c in report["cases"])
    record(3, passed, f"{len(report['cases'])} corrected operators, worst residual {worst:.2e}, doubled {worst2:.2e}")
    assert passed


def test_criterion_4_index_invariance():
    passed, report, seconds = _run(4)
    record(4, passed, f"{report['violations']} violations over {report['trials']} trials")
    assert passed


def test_criterion_5_additivity():
    passed, report, seconds = _run(5)
    record(5, passed, f"{report['violations']} violations over {report['pairs']} pairs")
    assert passed


def test_criterion_6_dilation_index():
    passed, report, seconds = _run(6)
    record(6, passed, "indices " + str([r["index"] for r in report["dilations"]]) + " for S^1, S^2, S^3")
    assert passed


def test_criterion_7_component_maps():
    lines = []
    ok = True
    for key in ("7z", "7z3", "7zz"):
        passed, report, seconds = _run(key)
        ok &= passed and seconds < 30
        lines.append(f"{report['symbol']}: n={[c['n'] for c in report['components']]} in {seconds:.2f}s")
    record(7, ok, "; ".join(lines))
    assert ok


def test_criterion_8_loop_constancy():
    passed, report, seconds = _run(8)
    record(8, passed, f"moving loop {report['moving_loop']}, constant u0 loop {report['constant_loop']}, {report['samples']} samples")
    assert passed


def test_criterion_9_determinism():
    first = dict(REPORTS)
    missing = [k for k in RUNNERS if k not in first]
    for key in missing:
        fn, *args = RUNNERS[key]
        first[key] = dumps(fn(*args)[1])
    differing = []
    for key in RUNNERS:
        fn, *args = RUNNERS[key]
        if dumps(fn(*args)[1]) != first[key]:
            differing.append(key)
    ok = not differing
    detail = f"{len(RUNNERS)} reports rerun, {len(differing)} differ" + (f": {differing}" if differing else "")
    record(9, ok, detail)
    assert ok
