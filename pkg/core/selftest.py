"""
Self Test - Exact structural suites run against brute force on small random fields
"""
import logging
from collections.abc import Callable

import numpy as np

from models.schemas import PlanePoint, PointField, PolymerSide, Region, ScaledPoint
from services.field_sampler import sample_field, sample_points, window_region
from services.lpp_solver import (
    chain_height,
    concatenate,
    constrained_energy,
    energy,
    lowermost_geodesic,
    uppermost_geodesic,
)
from services.oracle import (
    brute_force_constrained_energy,
    brute_force_energy,
    enumerate_geodesics,
)
from services.scaling import polymer, to_unscaled
from services.weight_profile import eval_energy, weight_profile


logger = logging.getLogger(__name__)

SIDE = 10.0
BOX = Region.rectangle(0.0, SIDE, 0.0, SIDE)
U = PlanePoint(a=0.0, b=0.0)
V = PlanePoint(a=SIDE, b=SIDE)
TOLERANCE = 1e-9


def small_field(rng: np.random.Generator, max_points: int = 12) -> PointField:
    """Uniform field of at most max_points points on the 10 x 10 box"""
    count = int(rng.integers(0, max_points + 1))
    a, b = sample_points(BOX, count, rng)
    return PointField(a=a, b=b, region=BOX)


# =============================================================================
# Suites: each checks one instance and returns True when it holds
# =============================================================================

def check_oracle(rng: np.random.Generator) -> bool:
    field = small_field(rng)
    allowed = Region.half_plane(offset=float(rng.uniform(0.0, SIDE / 2)))
    return (
        energy(field, U, V) == brute_force_energy(field, U, V)
        and constrained_energy(field, U, V, allowed)
        == brute_force_constrained_energy(field, U, V, allowed)
    )


def check_extremality(rng: np.random.Generator) -> bool:
    field = small_field(rng, max_points=10)
    geodesics = enumerate_geodesics(field, U, V)
    upper = uppermost_geodesic(field, U, V)
    lower = lowermost_geodesic(field, U, V)
    if upper not in geodesics or lower not in geodesics:
        return False

    grid = np.unique(np.concatenate([[p.a for p in g.path] for g in geodesics]))
    heights = np.array([chain_height(g, grid) for g in geodesics])
    return (
        np.allclose(chain_height(upper, grid), heights.max(axis=0), atol=TOLERANCE)
        and np.allclose(chain_height(lower, grid), heights.min(axis=0), atol=TOLERANCE)
    )


def check_concatenation(rng: np.random.Generator) -> bool:
    field = small_field(rng)
    if field.count == 0:
        return True
    w = field.points[int(rng.integers(0, field.count))]
    first = uppermost_geodesic(field, U, w)
    second = uppermost_geodesic(field, w, V)
    joined = concatenate(first, second)
    return (
        joined.energy == energy(field, U, w) + energy(field, w, V)
        and len(joined.point_set()) == joined.energy
        and energy(field, U, V) >= joined.energy
    )


def check_ordering(rng: np.random.Generator) -> bool:
    n = 50.0
    field = sample_field(window_region(n, 0.0, 1.0, x_extent=1.0), seed=int(rng.integers(0, 2**32)))
    x1, x2 = sorted(rng.uniform(-1.0, 1.0, 2))
    y1, y2 = sorted(rng.uniform(-1.0, 1.0, 2))
    times = np.linspace(0.0, 1.0, 100)
    for side in PolymerSide:
        left = polymer(field, n, ScaledPoint(x=x1, t=0.0), ScaledPoint(x=y1, t=1.0), side)
        right = polymer(field, n, ScaledPoint(x=x2, t=0.0), ScaledPoint(x=y2, t=1.0), side)
        if np.any(np.interp(times, left.t, left.x) > np.interp(times, right.t, right.x) + TOLERANCE):
            return False
    return True


def check_sandwich(rng: np.random.Generator) -> bool:
    n = 50.0
    field = sample_field(window_region(n, 0.0, 1.0, x_extent=1.0), seed=int(rng.integers(0, 2**32)))
    xs = np.sort(rng.uniform(-1.0, 1.0, 3))
    ys = np.sort(rng.uniform(-1.0, 1.0, 3))
    times = np.linspace(0.0, 1.0, 100)
    spread = max(abs(xs[0] - xs[1]), abs(xs[2] - xs[1]))
    for side in PolymerSide:
        paths = [
            polymer(field, n, ScaledPoint(x=float(x), t=0.0), ScaledPoint(x=float(y), t=1.0), side)
            for x, y in zip(xs, ys)
        ]
        increments = [np.abs(np.interp(times, p.t, p.x) - p.x[0]) for p in paths]
        # the middle polymer is bounded by the outer two only
        bound = np.maximum(increments[0], increments[2]) + spread
        if np.any(increments[1] > bound + TOLERANCE):
            return False
    return True


def check_agreement(rng: np.random.Generator) -> bool:
    field = small_field(rng, max_points=40)
    corners = np.sort(rng.uniform(0.0, 2.0, (2, 2)), axis=0)
    u1, u2 = (PlanePoint(a=float(a), b=float(b)) for a, b in corners)
    v1 = PlanePoint(a=SIDE - float(rng.uniform(0.0, 2.0)), b=SIDE - float(rng.uniform(0.0, 2.0)))
    first = uppermost_geodesic(field, u1, V)
    second = uppermost_geodesic(field, u2, v1)
    shared = sorted(first.point_set() & second.point_set(), key=lambda p: p.a)
    if len(shared) < 2:
        return True
    z1, z2 = shared[0], shared[-1]

    def between(chain):
        return [p for p in chain.interior if z1.precedes(p) and p.precedes(z2)]

    return between(first) == between(second)


def check_profile(rng: np.random.Generator) -> bool:
    n = 20.0
    field = sample_field(Region.rectangle(0.0, 2 * n, 0.0, 2 * n), seed=int(rng.integers(0, 2**32)))
    profile = weight_profile(field, n)
    for t in rng.uniform(1.0, 2.0, 10):
        corner = to_unscaled(n, ScaledPoint(x=0.0, t=float(t)))
        if eval_energy(profile, float(t)) != energy(field, U, corner):
            return False
    return True


SUITES: dict[str, Callable[[np.random.Generator], bool]] = {
    "oracle_equivalence": check_oracle,
    "geodesic_extremality": check_extremality,
    "concatenation": check_concatenation,
    "polymer_ordering": check_ordering,
    "sandwiching": check_sandwich,
    "two_point_agreement": check_agreement,
    "weight_profile": check_profile,
}


def run_selftest(instances: int = 200, seed: int = 0) -> list[dict[str, int | str]]:
    """Run every suite on `instances` random instances; one report row per suite"""
    report = []
    for offset, (name, check) in enumerate(SUITES.items()):
        rng = np.random.default_rng([seed, offset])
        failures = sum(not check(rng) for _ in range(instances))
        logger.info("selftest %s: %d/%d failures", name, failures, instances)
        report.append({"suite": name, "instances": instances, "failures": failures})
    return report
