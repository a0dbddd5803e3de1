"""Acceptance suite: one test per primary criterion, tolerances pinned in
decaylab.acceptance. Each test prints its pass/fail line.
"""

import pytest

from decaylab import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA.values(),
                         ids=list(acceptance.CRITERIA))
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print(f"\n[{result.verdict.upper():4s}] {result.name} "
              f"({result.runtime_s:.2f}s)")
    assert result.passed, result.details
