"""Acceptance criteria 1-12, each asserted exactly on the default truncation.

Every test prints one PASS/FAIL line (shown even under captured output).
Run standalone with ``python tests/test_acceptance.py``.
"""
import sys

import pytest

from extoda.verify import CRITERIA, Context


@pytest.fixture(scope="module")
def ctx():
    return Context()


def _report(n, results, capsys=None):
    title = CRITERIA[n][0]
    ok = all(r.passed for r in results)
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title} ({sum(r.passed for r in results)}/{len(results)})"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, ctx, capsys):
    results = CRITERIA[n][1](ctx)
    assert results, "criterion produced no checks"
    ok = _report(n, results, capsys)
    failed = [f"{r.check_id}: {r.residual}" for r in results if not r.passed]
    assert ok, "; ".join(failed)


def test_criterion_counts(ctx):
    # every criterion checks the full index range it promises
    counts = {n: len(CRITERIA[n][1](ctx)) for n in (4, 5, 6, 7, 9)}
    assert counts == {4: 87, 5: 30, 6: 6, 7: 4, 9: 5}


if __name__ == "__main__":
    c = Context()
    sys.exit(0 if all([_report(n, CRITERIA[n][1](c)) for n in sorted(CRITERIA)]) else 1)
