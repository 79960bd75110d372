"""
Scaling Service - KPZ scaled coordinates: polymers, weights, transversal fluctuation
"""
import logging
import math

import numpy as np

from core.exceptions import IncompatibleEndpoints, InvalidParameter
from models.schemas import (
    AdmissiblePair,
    Chain,
    PlanePoint,
    PointField,
    Polymer,
    PolymerSide,
    Region,
    ScaledPoint,
)
from services.lpp_solver import constrained_energy, energy, extremal_geodesic


logger = logging.getLogger(__name__)


# =============================================================================
# Coordinates
# =============================================================================

def to_unscaled(n: float, p: ScaledPoint) -> PlanePoint:
    """T_n^{-1}(x, t) = (nt + x n^{2/3}, nt - x n^{2/3})"""
    _check_n(n)
    shift = p.x * n ** (2 / 3)
    return PlanePoint(a=n * p.t + shift, b=n * p.t - shift)


def to_scaled(n: float, q: PlanePoint) -> ScaledPoint:
    """T_n(a, b) = ((a - b) / 2n^{2/3}, (a + b) / 2n)"""
    _check_n(n)
    return ScaledPoint(x=(q.a - q.b) / (2 * n ** (2 / 3)), t=(q.a + q.b) / (2 * n))


def compatible(n: float, u: ScaledPoint, v: ScaledPoint) -> bool:
    """Whether polymers exist from u to v: |u.x - v.x| < n^{1/3}(v.t - u.t)"""
    _check_n(n)
    if u.t >= v.t:
        raise IncompatibleEndpoints(f"start time {u.t} must precede end time {v.t}")
    return abs(u.x - v.x) < n ** (1 / 3) * (v.t - u.t)


def _require_compatible(n: float, u: ScaledPoint, v: ScaledPoint) -> None:
    if not compatible(n, u, v):
        raise IncompatibleEndpoints(
            f"no polymer from ({u.x}, {u.t}) to ({v.x}, {v.t}) at n={n}"
        )


def _check_n(n: float) -> None:
    if not n > 0:
        raise InvalidParameter(f"scaling parameter n must be positive, got {n}")


# =============================================================================
# Polymers
# =============================================================================

def polymer(
    field: PointField,
    n: float,
    u: ScaledPoint,
    v: ScaledPoint,
    side: PolymerSide = PolymerSide.LEFTMOST
) -> Polymer:
    """Leftmost (image of the uppermost geodesic) or rightmost polymer"""
    _require_compatible(n, u, v)
    chain = extremal_geodesic(field, to_unscaled(n, u), to_unscaled(n, v), side)
    return polymer_from_chain(n, chain, u, v, side)


def polymer_from_chain(
    n: float,
    chain: Chain,
    u: ScaledPoint,
    v: ScaledPoint,
    side: PolymerSide
) -> Polymer:
    inner = chain.path[1:-1]
    ts = [u.t]
    xs = [u.x]
    for p in inner:
        q = to_scaled(n, p)
        ts.append(q.t)
        xs.append(q.x)
    ts.append(v.t)
    xs.append(v.x)
    return Polymer(
        n=n,
        start=u,
        end=v,
        side=side,
        t=np.array(ts),
        x=np.array(xs),
        chain=chain
    )


def eval_polymer(p: Polymer, t: float | np.ndarray) -> float | np.ndarray:
    """rho(t): linear interpolation between the bracketing vertices"""
    lo, hi = p.lifetime
    if np.any(np.asarray(t) < lo) or np.any(np.asarray(t) > hi):
        raise InvalidParameter(f"t={t} outside polymer lifetime [{lo}, {hi}]")
    value = np.interp(t, p.t, p.x)
    return float(value) if np.ndim(value) == 0 else value


def chord(p: Polymer, t: float | np.ndarray) -> float | np.ndarray:
    """The straight line joining the polymer's endpoints"""
    slope = (p.end.x - p.start.x) / (p.end.t - p.start.t)
    return p.start.x + (np.asarray(t) - p.start.t) * slope


def modulus_statistic(p: Polymer, t: float, grid: int = 256) -> float:
    """
    sup over z of |rho(z + t) - rho(z)| across the lifetime. The grid of
    step (lifetime - t)/grid is augmented with every vertex time and every
    vertex time minus t, which makes the sup exact.
    """
    lo, hi = p.lifetime
    if not 0 < t < hi - lo:
        raise InvalidParameter(f"lag t must lie in (0, {hi - lo}), got {t}")
    if grid < 1:
        raise InvalidParameter(f"grid must be positive, got {grid}")

    z = np.concatenate((np.linspace(lo, hi - t, grid + 1), p.t, p.t - t))
    z = z[(z >= lo) & (z <= hi - t)]
    upper = np.minimum(z + t, hi)
    return float(np.max(np.abs(np.interp(upper, p.t, p.x) - np.interp(z, p.t, p.x))))


def local_position(p: Polymer, t: float) -> float:
    """Signed horizontal distance from the chord at one time"""
    return float(eval_polymer(p, t) - chord(p, t))


def transversal_fluctuation(p: Polymer) -> float:
    """
    TF(rho) = sup_t |rho(t) - chord(t)|. Both are linear between the
    polymer's vertices, so the supremum sits at a vertex.
    """
    return float(np.max(np.abs(p.x - chord(p, p.t))))


# =============================================================================
# Weights
# =============================================================================

def weight(field: PointField, n: float, u: ScaledPoint, v: ScaledPoint) -> float:
    """W = n^{-1/3} (X - 2n(v.t - u.t))"""
    _require_compatible(n, u, v)
    x = energy(field, to_unscaled(n, u), to_unscaled(n, v))
    return n ** (-1 / 3) * (x - 2 * n * (v.t - u.t))


# =============================================================================
# Transversal fluctuation functionals
# =============================================================================

def tf_between(field: PointField, n: float, u: ScaledPoint, v: ScaledPoint) -> float:
    """Largest TF among polymers from u to v (the two extremal ones)"""
    return max(
        transversal_fluctuation(polymer(field, n, u, v, PolymerSide.LEFTMOST)),
        transversal_fluctuation(polymer(field, n, u, v, PolymerSide.RIGHTMOST))
    )


def min_tf_exceeds(field: PointField, n: float, t1: float, t2: float, s: float) -> bool:
    """
    Whether every polymer from (0, t1) to (0, t2) leaves the strip
    [-s, s] x [t1, t2], decided as: the best path confined to the strip
    collects strictly fewer points than the unconstrained geodesic.
    """
    if s <= 0:
        raise InvalidParameter(f"strip half width s must be positive, got {s}")
    u = ScaledPoint(x=0.0, t=t1)
    v = ScaledPoint(x=0.0, t=t2)
    _require_compatible(n, u, v)

    lower = to_unscaled(n, u)
    upper = to_unscaled(n, v)
    strip = Region.diagonal_strip(n=n, half_width=s * n ** (2 / 3), t_min=t1, t_max=t2)
    return constrained_energy(field, lower, upper, strip) < energy(field, lower, upper)


def admissible_pairs(n: float, t: float, psi: float, refine: int) -> list[AdmissiblePair]:
    """
    Mesh of admissible endpoint pairs: time step t/refine, horizontal step
    t^{2/3}/refine, both anchored at zero so doubling `refine` nests meshes.
    """
    if not 0 < t <= 1:
        raise InvalidParameter(f"t must lie in (0, 1], got {t}")
    if psi <= 0 or refine < 1:
        raise InvalidParameter(f"need psi > 0 and refine >= 1, got psi={psi}, refine={refine}")
    if not n > psi ** 3:
        raise InvalidParameter(f"need n > psi^3 = {psi ** 3}, got n={n}")

    # i * t / refine rather than i * (t / refine): doubling refine reproduces every node bit for bit
    times = [i * t / refine for i in range(math.floor(refine / t) + 2)]
    times = [s for s in times if s <= 1]
    x_unit = t ** (2 / 3)
    k_max = math.floor(refine / x_unit) + 1
    xs = [k * x_unit / refine for k in range(-k_max, k_max + 1)]
    xs = [x for x in xs if abs(x) <= 1]

    pairs = []
    for i, t1 in enumerate(times):
        for j in range(1, refine + 1):
            if i + j >= len(times):
                break
            t2 = times[i + j]
            for x1 in xs:
                for x2 in xs:
                    if abs(x2 - x1) <= psi * (t2 - t1):
                        pairs.append(AdmissiblePair(
                            u=ScaledPoint(x=x1, t=t1),
                            v=ScaledPoint(x=x2, t=t2),
                            psi=psi,
                            t_bound=t
                        ))
    return pairs


def mtf_estimate(
    field: PointField,
    n: float,
    t: float,
    psi: float = 4.0,
    refine: int = 4
) -> float:
    """
    Mesh lower bound on the maximum transversal fluctuation over admissible
    endpoint pairs with vertical gap at most t.
    """
    pairs = admissible_pairs(n, t, psi, refine)
    logger.debug("mtf mesh: %d admissible pairs at refine=%d", len(pairs), refine)

    best = 0.0
    for pair in pairs:
        best = max(best, tf_between(field, n, pair.u, pair.v))
    return best
