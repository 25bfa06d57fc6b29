"""The twelve acceptance criteria at their reference settings.

Each test prints one PASS/FAIL line.  Run directly with
``python tests/test_acceptance.py`` for the summary alone.
"""

import pytest

from spinsys.verification import CRITERIA

SEED = 0


def _run(name):
    fn = CRITERIA[name]
    return fn() if name in ("integral", "influence") else fn(seed=SEED)


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name, capsys):
    result = _run(name)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.to_json()


if __name__ == "__main__":
    import sys

    results = [_run(n) for n in CRITERIA]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
