"""
Field Sampler Service - Poisson point fields on rectangles and diagonal strips
"""
import logging
import math

import numpy as np

from core.exceptions import InvalidParameter, InvalidRegion
from models.schemas import PointField, Region, RegionKind


logger = logging.getLogger(__name__)

MAX_RESAMPLE_ROUNDS = 64


def sample_field(region: Region, rate: float = 1.0, seed: int = 0) -> PointField:
    """
    Sample a homogeneous Poisson field of the given rate on a region.
    Deterministic given (region, rate, seed).
    """
    if rate <= 0:
        raise InvalidParameter(f"rate must be positive, got {rate}")
    if seed < 0:
        raise InvalidParameter(f"seed must be non-negative, got {seed}")
    _check_samplable(region)

    rng = np.random.default_rng(seed)
    count = int(rng.poisson(rate * region.area))
    a, b = sample_points(region, count, rng)

    logger.debug("sampled %d points on %s (seed=%d)", count, region.kind.value, seed)
    return PointField(a=a, b=b, region=region, seed=seed, rate=rate)


def sample_points(
    region: Region,
    count: int,
    rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """
    Draw `count` i.i.d. uniform points on a region, sorted by a.
    Points that collide in either coordinate are redrawn.
    """
    _check_samplable(region)
    a, b = _uniform(region, count, rng)

    for _ in range(MAX_RESAMPLE_ROUNDS):
        clash = _colliding(a) | _colliding(b)
        if not clash.any():
            break
        logger.debug("resampling %d colliding points", int(clash.sum()))
        a[clash], b[clash] = _uniform(region, int(clash.sum()), rng)
    else:
        raise InvalidRegion("could not resolve coordinate collisions; region too degenerate")

    order = np.argsort(a, kind="stable")
    return a[order], b[order]


def window_region(
    n: float,
    t_min: float,
    t_max: float,
    x_extent: float = 0.0,
    k_trunc: float = 12.0
) -> Region:
    """
    Cheapest region serving every scaled endpoint with |x| <= x_extent and
    t in [t_min, t_max]: the bounding rectangle or the diagonal strip
    truncated k_trunc transversal scales away from the chord.
    """
    if n <= 0 or not t_max > t_min:
        raise InvalidParameter(f"bad window: n={n}, t in [{t_min}, {t_max}]")
    if x_extent < 0 or k_trunc <= 0:
        raise InvalidParameter(f"bad window: x_extent={x_extent}, k_trunc={k_trunc}")

    span = t_max - t_min
    wiggle = x_extent * n ** (2 / 3)
    rect = Region.rectangle(
        n * t_min - wiggle, n * t_max + wiggle,
        n * t_min - wiggle, n * t_max + wiggle
    )

    # endpoint rounding in T_n^{-1} can leave a+b a hair outside [2n*t_min, 2n*t_max]
    pad = 1e-9 * span
    strip = Region.diagonal_strip(
        n=n,
        half_width=(k_trunc * span ** (2 / 3) + x_extent) * n ** (2 / 3),
        t_min=t_min - pad,
        t_max=t_max + pad
    )
    return strip if strip.area < rect.area else rect


def _check_samplable(region: Region) -> None:
    if region.kind == RegionKind.HALF_PLANE or not math.isfinite(region.area):
        raise InvalidRegion(f"cannot sample an unbounded {region.kind.value} region")
    if region.area <= 0:
        raise InvalidRegion(f"region area must be positive, got {region.area}")


def _uniform(
    region: Region,
    count: int,
    rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    if region.kind == RegionKind.RECTANGLE:
        a = rng.uniform(region.a_lo, region.a_hi, count)
        b = rng.uniform(region.b_lo, region.b_hi, count)
        return a, b

    s = rng.uniform(2 * region.n * region.t_min, 2 * region.n * region.t_max, count)
    d = rng.uniform(-2 * region.half_width, 2 * region.half_width, count)
    a = (s + d) / 2
    b = (s - d) / 2
    # rounding of the rotation can step outside the closed strip; redraw those
    outside = ~region.contains(a, b)
    if outside.any():
        a[outside], b[outside] = _uniform(region, int(outside.sum()), rng)
    return a, b


def _colliding(values: np.ndarray) -> np.ndarray:
    """Mask of every occurrence after the first of a repeated value"""
    mask = np.zeros(values.size, dtype=bool)
    if values.size < 2:
        return mask
    order = np.argsort(values, kind="stable")
    repeats = np.flatnonzero(np.diff(values[order]) == 0) + 1
    mask[order[repeats]] = True
    return mask
