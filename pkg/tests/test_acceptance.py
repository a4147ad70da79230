"""Acceptance suite: one test and one PASS/FAIL line per criterion.

The suite runs once per session (about a minute and a half on one core,
criterion 12 included).  Run it alone with

    pytest tests/test_acceptance.py -v

or as a script, ``python tests/test_acceptance.py``.
"""

import sys

import pytest

from slowmotion.acceptance import verify

NUMBERS = list(range(1, 13))


@pytest.fixture(scope="session")
def verdicts(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    return {r.number: r for r in verify(out, log=None)}


@pytest.mark.slow
@pytest.mark.parametrize("number", NUMBERS)
def test_criterion(verdicts, number, capsys):
    r = verdicts[number]
    with capsys.disabled():
        print(f"\n{r.line()}")
        for c in r.checks:
            print(f"    {'ok  ' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    failed = [f"{c.name}: {c.detail}" for c in r.checks if not c.passed]
    assert r.passed, "; ".join(failed)


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        results = verify(tmp, log=None)
    for r in sorted(results, key=lambda r: r.number):
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
