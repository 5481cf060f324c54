import pytest

from qpm_lab import bundled_material


@pytest.fixture(scope="session")
def ktp():
    return bundled_material("ktp", require_axes=("Y", "Z"))


@pytest.fixture(scope="session")
def yvo4():
    return bundled_material("yvo4", require_axes=("o", "e"))
