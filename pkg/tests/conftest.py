"""
Shared fixtures for the lab test suite
"""
import pytest

from models.schemas import PlanePoint, PointField, Region


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run desk-scale campaigns")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_field(points, region=None):
    """Field on a 10 x 10 box (or `region`) from literal coordinates"""
    return PointField.from_points(points, region=region or Region.rectangle(0, 10, 0, 10))


@pytest.fixture
def origin():
    return PlanePoint(a=0, b=0)


@pytest.fixture
def empty_field():
    return make_field([])
