"""Release acceptance suite.

Each criterion runs at its stated tolerance through
:mod:`starfd.validation`, shared with the ``starfd validate`` CLI; one
pass/fail line per criterion is printed even on success (run with ``-s`` or
``-rP`` to see them).
"""

import os

import pytest

from starfd.validation import CRITERIA, run_criteria

WORKERS = min(4, os.cpu_count() or 1)


@pytest.mark.parametrize(
    "cid,name,fn", CRITERIA, ids=[f"criterion-{cid:02d}-{name.replace(' ', '-')}" for cid, name, _ in CRITERIA]
)
def test_acceptance_criterion(cid, name, fn):
    results = run_criteria(ids={cid}, workers=WORKERS)
    assert len(results) == 1
    r = results[0]
    line = f"[{'PASS' if r.passed else 'FAIL'}] criterion {r.cid:2d} ({r.seconds:6.1f}s) {r.name}: {r.detail}"
    print(line)
    assert r.passed, line
