import doctest

import pytest

import qkr.core


@pytest.mark.parametrize("module", [qkr.core])
def test_module_doctests(module):
    result = doctest.testmod(module)
    assert result.attempted > 0 and result.failed == 0
