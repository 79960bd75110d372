"""
Oracle Service - Exhaustive search over increasing chains for small boxes
"""
from itertools import combinations

from core.exceptions import TooManyPoints
from models.schemas import Chain, PlanePoint, PointField, Region
from services.lpp_solver import box_indices


MAX_ORACLE_POINTS = 16


def brute_force_energy(field: PointField, u: PlanePoint, v: PlanePoint) -> int:
    """Largest increasing subsequence found by trying every subset"""
    return _best_size(_oracle_points(field, u, v))


def brute_force_constrained_energy(
    field: PointField,
    u: PlanePoint,
    v: PlanePoint,
    allowed: Region
) -> int:
    return _best_size(_oracle_points(field, u, v, allowed))


def enumerate_geodesics(field: PointField, u: PlanePoint, v: PlanePoint) -> set[Chain]:
    """Every maximizing chain from u to v"""
    points = _oracle_points(field, u, v)
    best = _best_size(points)
    return {
        Chain(start=u, end=v, interior=subset)
        for subset in combinations(points, best)
        if _is_chain(subset)
    }


def _oracle_points(
    field: PointField,
    u: PlanePoint,
    v: PlanePoint,
    allowed: Region | None = None
) -> list[PlanePoint]:
    idx = box_indices(field, u, v, allowed)
    if idx.size > MAX_ORACLE_POINTS:
        raise TooManyPoints(
            f"{idx.size} points in the box; exhaustive search is limited to {MAX_ORACLE_POINTS}"
        )
    return [PlanePoint(a=float(field.a[i]), b=float(field.b[i])) for i in idx]


def _best_size(points: list[PlanePoint]) -> int:
    for size in range(len(points), 0, -1):
        if any(_is_chain(subset) for subset in combinations(points, size)):
            return size
    return 0


def _is_chain(subset: tuple[PlanePoint, ...]) -> bool:
    # subsets inherit the field's order by a
    return all(p.b < q.b and p.a < q.a for p, q in zip(subset, subset[1:]))
