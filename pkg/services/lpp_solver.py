"""
LPP Solver Service - Energies, extremal geodesics and constrained energies
"""
import logging
from bisect import bisect_left

import numpy as np

from core.exceptions import (
    EndpointMismatch,
    EndpointOutsideRegion,
    IncomparableEndpoints,
    RegionTooSmall,
)
from models.schemas import Chain, PlanePoint, PointField, PolymerSide, Region


logger = logging.getLogger(__name__)


# =============================================================================
# Energies
# =============================================================================

def energy(field: PointField, u: PlanePoint, v: PlanePoint) -> int:
    """
    X_u^v: the largest number of field points on an increasing path from u
    to v, counting u when it is a field point and never counting v.
    """
    idx = box_indices(field, u, v)
    if idx.size == 0:
        return 0
    return int(chain_lengths(field.b[idx]).max())


def constrained_energy(
    field: PointField,
    u: PlanePoint,
    v: PlanePoint,
    allowed: Region
) -> int:
    """Energy using only field points inside `allowed`"""
    idx = box_indices(field, u, v, allowed)
    if idx.size == 0:
        return 0
    return int(chain_lengths(field.b[idx]).max())


def forward_lengths(field: PointField, u: PlanePoint, v: PlanePoint) -> dict[PlanePoint, int]:
    """F(p): longest chain from u ending at p, p included"""
    idx = box_indices(field, u, v)
    lengths = chain_lengths(field.b[idx])
    return _as_mapping(field, idx, lengths)


def backward_lengths(field: PointField, u: PlanePoint, v: PlanePoint) -> dict[PlanePoint, int]:
    """B(p): longest chain starting at p, p included, staying below v"""
    idx = box_indices(field, u, v)
    lengths = reverse_chain_lengths(field.b[idx])
    return _as_mapping(field, idx, lengths)


def chain_lengths(b_values: np.ndarray) -> np.ndarray:
    """
    Patience scan: for points already sorted by a, the length of the longest
    chain ending at each point.
    """
    tails: list[float] = []
    lengths = np.empty(b_values.size, dtype=np.int64)
    for i, b in enumerate(b_values.tolist()):
        k = bisect_left(tails, b)
        if k == len(tails):
            tails.append(b)
        else:
            tails[k] = b
        lengths[i] = k + 1
    return lengths


def reverse_chain_lengths(b_values: np.ndarray) -> np.ndarray:
    """Longest chain starting at each point (points sorted by a)"""
    return chain_lengths(-b_values[::-1])[::-1]


# =============================================================================
# Geodesics
# =============================================================================

def uppermost_geodesic(field: PointField, u: PlanePoint, v: PlanePoint) -> Chain:
    return extremal_geodesic(field, u, v, PolymerSide.LEFTMOST)


def lowermost_geodesic(field: PointField, u: PlanePoint, v: PlanePoint) -> Chain:
    return extremal_geodesic(field, u, v, PolymerSide.RIGHTMOST)


def extremal_geodesic(
    field: PointField,
    u: PlanePoint,
    v: PlanePoint,
    side: PolymerSide,
    allowed: Region | None = None
) -> Chain:
    """
    Uppermost (side=leftmost) or lowermost (side=rightmost) geodesic.

    A point lies on some geodesic iff F(p) + B(p) - 1 == X. Points of one
    level F form an antichain, so walking level by level and keeping the
    candidate with the largest b (uppermost) or largest a (lowermost)
    traces the extremal geodesic.
    """
    idx = box_indices(field, u, v, allowed)
    if idx.size == 0:
        return Chain(start=u, end=v)

    a = field.a[idx]
    b = field.b[idx]
    forward = chain_lengths(b)
    backward = reverse_chain_lengths(b)
    total = int(forward.max())

    on_geodesic = np.flatnonzero(forward + backward - 1 == total)
    levels = forward[on_geodesic]
    order = np.argsort(levels, kind="stable")
    on_geodesic = on_geodesic[order]
    bounds = np.searchsorted(levels[order], np.arange(1, total + 2))

    picked: list[int] = []
    for level in range(total):
        candidates = on_geodesic[bounds[level]:bounds[level + 1]]
        if picked:
            last = picked[-1]
            candidates = candidates[(a[candidates] > a[last]) & (b[candidates] > b[last])]
        if side == PolymerSide.LEFTMOST:
            picked.append(int(candidates[np.argmax(b[candidates])]))
        else:
            picked.append(int(candidates[np.argmax(a[candidates])]))

    logger.debug("geodesic of energy %d through %d candidate points", total, on_geodesic.size)
    interior = tuple(PlanePoint(a=float(a[i]), b=float(b[i])) for i in picked)
    return Chain(start=u, end=v, interior=interior)


def concatenate(c1: Chain, c2: Chain) -> Chain:
    """Join two chains meeting at c1.end == c2.start; energies add"""
    if c1.end != c2.start:
        raise EndpointMismatch(f"cannot concatenate: {c1.end} != {c2.start}")
    return Chain(start=c1.start, end=c2.end, interior=c1.interior + c2.interior)


def chain_height(chain: Chain, a: float | np.ndarray) -> float | np.ndarray:
    """The chain as a piecewise-linear function of the horizontal coordinate"""
    path = chain.path
    return np.interp(a, [p.a for p in path], [p.b for p in path])


# =============================================================================
# Helpers
# =============================================================================

def check_endpoints(field: PointField, u: PlanePoint, v: PlanePoint) -> None:
    if not u.precedes(v):
        raise IncomparableEndpoints(f"{u.as_tuple()} does not precede {v.as_tuple()}")
    if not field.region.covers(u, v):
        raise RegionTooSmall(
            f"field region {field.region.kind.value} does not cover "
            f"{u.as_tuple()} -> {v.as_tuple()}"
        )


def box_indices(
    field: PointField,
    u: PlanePoint,
    v: PlanePoint,
    allowed: Region | None = None
) -> np.ndarray:
    """Indices of field points p with u ≼ p ≼ v, p != v, inside `allowed`"""
    check_endpoints(field, u, v)
    if allowed is not None:
        for endpoint in (u, v):
            if not allowed.contains_point(endpoint):
                raise EndpointOutsideRegion(f"{endpoint.as_tuple()} lies outside the allowed region")

    lo = int(np.searchsorted(field.a, u.a, side="left"))
    hi = int(np.searchsorted(field.a, v.a, side="right"))
    a = field.a[lo:hi]
    b = field.b[lo:hi]
    keep = (b >= u.b) & (b <= v.b) & ~((a == v.a) & (b == v.b))
    if allowed is not None:
        keep &= allowed.contains(a, b)

    idx = np.flatnonzero(keep) + lo
    logger.debug("box holds %d field points", idx.size)
    return idx


def _as_mapping(field: PointField, idx: np.ndarray, lengths: np.ndarray) -> dict[PlanePoint, int]:
    return {
        PlanePoint(a=a, b=b): int(length)
        for a, b, length in zip(field.a[idx].tolist(), field.b[idx].tolist(), lengths.tolist())
    }
