"""One test per acceptance criterion, each printing a single pass/fail line.

The criteria share memoized scenario runs (see ``qotlab.acceptance``), so the
full module costs about as much as one ``qotlab verify``.
"""

import pytest

from qotlab import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
