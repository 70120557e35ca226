"""Shared fixtures for the cartankit test suites."""
import sys
from pathlib import Path

import pytest

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from cartankit.core.config import Settings, PACKAGE_FIXTURES
from cartankit.core.exactlin import IntMatrix, ones_plus_identity
from cartankit.core.fixtures import FixtureLibrary
from cartankit.core.paction import AbelianPGroup, ActionGroup, general_linear_generators


@pytest.fixture
def settings(tmp_path):
    return Settings(fixtures_dir=PACKAGE_FIXTURES, home_dir=tmp_path / "home")


@pytest.fixture(scope="session")
def library():
    return FixtureLibrary()


@pytest.fixture
def ones3():
    return ones_plus_identity(3)


@pytest.fixture
def a2():
    return IntMatrix.from_rows([[2, 1], [1, 2]])


@pytest.fixture
def z4sq_z3():
    group = AbelianPGroup.homocyclic(2, 2, 2)
    return group, ActionGroup.from_matrices(group, [[[0, 3], [1, 3]]])


@pytest.fixture
def z2sq_z3():
    group = AbelianPGroup.elementary(2, 2)
    return group, ActionGroup.from_matrices(group, [[[0, 1], [1, 1]]])


@pytest.fixture
def z2sq_gl():
    group = AbelianPGroup.elementary(2, 2)
    return group, ActionGroup.from_matrices(group, general_linear_generators(2))


@pytest.fixture(scope="session")
def f21():
    group = AbelianPGroup.elementary(2, 3)
    return group, ActionGroup.from_matrices(group, [
        [[0, 0, 1], [1, 0, 1], [0, 1, 0]],
        [[1, 0, 0], [0, 0, 1], [0, 1, 1]]
    ])
