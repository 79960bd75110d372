import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.exceptions import (
    EndpointMismatch,
    EndpointOutsideRegion,
    IncomparableEndpoints,
    RegionTooSmall,
)
from models.schemas import Chain, PlanePoint, PolymerSide, Region
from services.lpp_solver import (
    backward_lengths,
    chain_height,
    concatenate,
    constrained_energy,
    energy,
    extremal_geodesic,
    forward_lengths,
    lowermost_geodesic,
    uppermost_geodesic,
)
from services.oracle import (
    brute_force_constrained_energy,
    brute_force_energy,
    enumerate_geodesics,
)
from tests.conftest import make_field


P = PlanePoint
U = P(a=0, b=0)
V = P(a=4, b=4)

coordinate = st.floats(min_value=0.0, max_value=10.0, allow_nan=False, exclude_min=True, exclude_max=True)
small_fields = st.lists(
    st.tuples(coordinate, coordinate),
    max_size=12,
    unique_by=(lambda p: p[0], lambda p: p[1])
).map(make_field)


# =============================================================================
# Energies
# =============================================================================

def test_empty_field_has_zero_energy(empty_field):
    assert energy(empty_field, U, P(a=5, b=5)) == 0


def test_energy_of_mixed_configuration():
    field = make_field([(1, 2), (2, 1), (3, 3)])
    assert energy(field, U, V) == 2


def test_energy_of_antichain():
    field = make_field([(1, 3), (2, 2), (3, 1)])
    assert energy(field, U, V) == 1


def test_end_point_is_not_counted():
    field = make_field([(1, 1), (2, 2)])
    assert energy(field, U, P(a=2, b=2)) == 1


def test_start_point_is_counted():
    field = make_field([(0, 0), (1, 1)])
    assert energy(field, U, P(a=5, b=5)) == 2


def test_points_on_the_box_edge_count():
    field = make_field([(0, 3), (4, 3.5)])
    assert energy(field, U, V) == 2


def test_incomparable_endpoints_rejected(empty_field):
    with pytest.raises(IncomparableEndpoints):
        energy(empty_field, P(a=5, b=0), P(a=0, b=5))


def test_region_too_small(empty_field):
    with pytest.raises(RegionTooSmall):
        energy(empty_field, U, P(a=20, b=20))


def test_constraint_covering_the_box_is_inactive():
    field = make_field([(1, 2), (2, 1), (3, 3)])
    assert constrained_energy(field, U, V, Region.rectangle(-1, 5, -1, 5)) == energy(field, U, V)


def test_constraint_excluding_every_point():
    field = make_field([(1, 2), (2, 3)])
    assert constrained_energy(field, U, V, Region.half_plane(0.0)) == 0


def test_constraint_below_diagonal():
    field = make_field([(1, 2), (2, 1)])
    assert constrained_energy(field, U, P(a=3, b=3), Region.half_plane(0.0)) == 1


def test_endpoint_outside_constraint(empty_field):
    with pytest.raises(EndpointOutsideRegion):
        constrained_energy(empty_field, U, V, Region.half_plane(-1.0))


def test_forward_and_backward_lengths():
    p, q = P(a=1, b=1), P(a=2, b=3)
    field = make_field([p.as_tuple(), q.as_tuple()])
    assert forward_lengths(field, U, V) == {p: 1, q: 2}
    assert backward_lengths(field, U, V) == {p: 2, q: 1}


# =============================================================================
# Geodesics
# =============================================================================

def test_extremal_geodesics_of_mixed_configuration():
    field = make_field([(1, 2), (2, 1), (3, 3)])
    upper = uppermost_geodesic(field, U, V)
    lower = lowermost_geodesic(field, U, V)
    assert upper.interior == (P(a=1, b=2), P(a=3, b=3))
    assert lower.interior == (P(a=2, b=1), P(a=3, b=3))
    assert upper.energy == lower.energy == 2


def test_unique_geodesic_is_both_extremes():
    field = make_field([(1, 1), (2, 2), (3, 3)])
    assert uppermost_geodesic(field, U, V) == lowermost_geodesic(field, U, V)


def test_empty_box_gives_straight_chain(empty_field):
    chain = uppermost_geodesic(empty_field, U, V)
    assert chain.interior == ()
    assert chain.path == [U, V]


def test_geodesic_inside_constraint():
    field = make_field([(1, 2), (2, 1), (3, 3)])
    chain = extremal_geodesic(field, U, V, PolymerSide.LEFTMOST, allowed=Region.half_plane(0.0))
    assert chain.interior == (P(a=2, b=1), P(a=3, b=3))


# =============================================================================
# Concatenation
# =============================================================================

def test_concatenate_with_empty_second_chain():
    c1 = Chain(start=U, end=P(a=2, b=2), interior=(P(a=1, b=1),))
    c2 = Chain(start=P(a=2, b=2), end=V)
    joined = concatenate(c1, c2)
    assert joined.interior == c1.interior
    assert joined.end == V
    assert joined.energy == 1


def test_shared_point_counted_once():
    w = P(a=2, b=2)
    c1 = Chain(start=U, end=w, interior=(P(a=1, b=1),))
    c2 = Chain(start=w, end=V, interior=(w,))
    assert concatenate(c1, c2).energy == c1.energy + c2.energy == 2


def test_concatenate_mismatch():
    with pytest.raises(EndpointMismatch):
        concatenate(Chain(start=U, end=P(a=1, b=1)), Chain(start=P(a=2, b=2), end=V))


# =============================================================================
# Against exhaustive search
# =============================================================================

@settings(max_examples=200, deadline=None)
@given(field=small_fields, offset=st.floats(min_value=0.0, max_value=5.0))
def test_energies_match_brute_force(field, offset):
    v = P(a=10, b=10)
    allowed = Region.half_plane(offset)
    assert energy(field, U, v) == brute_force_energy(field, U, v)
    assert constrained_energy(field, U, v, allowed) == brute_force_constrained_energy(field, U, v, allowed)


@settings(max_examples=150, deadline=None)
@given(field=small_fields)
def test_extremal_geodesics_bound_all_geodesics(field):
    v = P(a=10, b=10)
    geodesics = enumerate_geodesics(field, U, v)
    upper = uppermost_geodesic(field, U, v)
    lower = lowermost_geodesic(field, U, v)
    assert upper in geodesics
    assert lower in geodesics

    grid = np.linspace(0.0, 10.0, 201)
    heights = np.array([chain_height(g, grid) for g in geodesics])
    assert np.allclose(chain_height(upper, grid), heights.max(axis=0), atol=1e-9)
    assert np.allclose(chain_height(lower, grid), heights.min(axis=0), atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(field=small_fields, pick=st.integers(min_value=0))
def test_superadditivity_through_field_points(field, pick):
    v = P(a=10, b=10)
    if field.count == 0:
        return
    w = field.points[pick % field.count]
    first = uppermost_geodesic(field, U, w)
    second = uppermost_geodesic(field, w, v)
    joined = concatenate(first, second)
    assert joined.energy == energy(field, U, w) + energy(field, w, v)
    assert len(joined.point_set()) == joined.energy
    assert energy(field, U, v) >= joined.energy
