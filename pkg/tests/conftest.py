import pytest

from dcmesh.groups import derive_params

TAG = b"dc-mesh/v1"


@pytest.fixture(scope="session")
def small():
    """The enumeration-friendly group: p=107, q=53, g=4, h=9."""
    return derive_params("test_small", TAG)


@pytest.fixture(scope="session")
def medium():
    """The tree-capable test group (large enough for slot encodings)."""
    return derive_params("test_medium", TAG)
