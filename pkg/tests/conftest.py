import pytest

from jointgrid.grid import load_grid
from jointgrid.synthesis import build_joint_network

from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "jointgrid" / "fixtures"


@pytest.fixture(scope="session")
def ieee14_grid():
    return load_grid(FIXTURES / "ieee14.json")


@pytest.fixture(scope="session")
def ieee14(ieee14_grid):
    return build_joint_network(ieee14_grid)


@pytest.fixture(scope="session")
def ieee118_grid():
    return load_grid(FIXTURES / "ieee118.json")


@pytest.fixture(scope="session")
def ieee118(ieee118_grid):
    return build_joint_network(ieee118_grid)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES
