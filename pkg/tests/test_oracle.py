import pytest

from core.exceptions import TooManyPoints
from models.schemas import Chain, PlanePoint, Region
from services.oracle import MAX_ORACLE_POINTS, brute_force_energy, enumerate_geodesics
from tests.conftest import make_field


U = PlanePoint(a=0, b=0)
V = PlanePoint(a=4, b=4)


def test_empty_field_has_one_empty_geodesic(empty_field):
    assert enumerate_geodesics(empty_field, U, V) == {Chain(start=U, end=V)}
    assert brute_force_energy(empty_field, U, V) == 0


def test_antichain_has_one_geodesic_per_point():
    field = make_field([(1, 3), (2, 2), (3, 1)])
    geodesics = enumerate_geodesics(field, U, V)
    assert len(geodesics) == 3
    assert {g.energy for g in geodesics} == {1}


def test_refuses_large_boxes():
    count = MAX_ORACLE_POINTS + 1
    field = make_field(
        [(i + 0.5, i + 0.25) for i in range(count)],
        region=Region.rectangle(0, 20, 0, 20)
    )
    with pytest.raises(TooManyPoints):
        brute_force_energy(field, U, PlanePoint(a=20, b=20))
