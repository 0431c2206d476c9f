import pytest

from fpexact import canonical_constants


@pytest.fixture(scope="session")
def bundle():
    return canonical_constants()
