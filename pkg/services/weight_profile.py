"""
Weight Profile Service - Jump structure of X_n(t) on [1, 2] and the modified weight Wgt_n
"""
import logging

import numpy as np

from core.exceptions import InvalidParameter
from models.schemas import PlanePoint, PointField, WeightProfile
from services.lpp_solver import box_indices, chain_lengths


logger = logging.getLogger(__name__)

PROFILE_WINDOW = (1.0, 2.0)


def weight_profile(field: PointField, n: float) -> WeightProfile:
    """
    Exact jumps of t -> X_(0,0)^(nt,nt) on [1, 2], without a t-grid.

    Every field point p in [0, 2n]^2 gets its forward chain length L(p);
    ordering the points by m_p = max(a_p, b_p)/n, the running maximum of L
    is X_n(t) for t >= m_p. A chain ending at p only uses points with
    smaller m, so the running maximum rises by one at a time.
    """
    if not n > 0:
        raise InvalidParameter(f"scaling parameter n must be positive, got {n}")

    # Step 1: forward lengths over the largest box of the window
    origin = PlanePoint(a=0.0, b=0.0)
    corner = PlanePoint(a=2 * n, b=2 * n)
    idx = box_indices(field, origin, corner)
    lengths = chain_lengths(field.b[idx])

    # Step 2: running maximum in order of the time each point enters the box
    m = np.maximum(field.a[idx], field.b[idx]) / n
    order = np.argsort(m, kind="stable")
    m = m[order]
    running = np.maximum.accumulate(lengths[order]) if lengths.size else lengths

    # Step 3: X_n(1) and the increases inside (1, 2]
    before = np.searchsorted(m, PROFILE_WINDOW[0], side="right")
    base_value = int(running[before - 1]) if before else 0

    window_m = m[before:]
    window_run = running[before:]
    previous = np.concatenate(([base_value], window_run))[:-1]
    rises = window_run > previous

    logger.debug("profile at n=%s: X_n(1)=%d with %d jumps", n, base_value, int(rises.sum()))
    return WeightProfile(
        n=n,
        base_value=base_value,
        jump_times=window_m[rises],
        values=window_run[rises].astype(np.int64),
        seed=field.seed,
        k_trunc=_strip_k(field, n)
    )


def _strip_k(field: PointField, n: float) -> float | None:
    """Truncation width of a strip field in transversal units of the full window"""
    if field.region.half_width is None:
        return None
    span = field.region.t_max - field.region.t_min
    return field.region.half_width / (n ** (2 / 3) * span ** (2 / 3))


def _check_window(t: float | np.ndarray) -> None:
    lo, hi = PROFILE_WINDOW
    if np.any(np.asarray(t) < lo) or np.any(np.asarray(t) > hi):
        raise InvalidParameter(f"profile time t={t} outside [{lo}, {hi}]")


def eval_energy(profile: WeightProfile, t: float | np.ndarray) -> int | np.ndarray:
    """The step function X_n(t), right-continuous"""
    _check_window(t)
    steps = np.searchsorted(profile.jump_times, t, side="right")
    value = profile.base_value + steps
    return int(value) if np.ndim(value) == 0 else value


def eval_wgt(profile: WeightProfile, t: float | np.ndarray) -> float | np.ndarray:
    """Wgt_n(t) = n^{-1/3} (X_n^mod(t) - 2nt), X_n^mod linear between nodes"""
    _check_window(t)
    value = _wgt(profile, np.asarray(t, dtype=np.float64))
    return float(value) if np.ndim(value) == 0 else value


def _wgt(profile: WeightProfile, t: np.ndarray) -> np.ndarray:
    times, levels = profile.nodes
    n = profile.n
    return n ** (-1 / 3) * (np.interp(t, times, levels) - 2 * n * t)


def weight_increment_statistic(profile: WeightProfile, t: float) -> float:
    """
    sup over 1 <= z <= 2 - t of |Wgt(z + t) - Wgt(z)|.

    The increment is linear in z between the node times and the node times
    shifted by -t, so evaluating there (and at both ends) is exact.
    """
    if not 0 < t < 1:
        raise InvalidParameter(f"increment lag t must lie in (0, 1), got {t}")

    lo, hi = PROFILE_WINDOW[0], PROFILE_WINDOW[1] - t
    times, _ = profile.nodes
    z = np.concatenate(([lo, hi], times, times - t))
    z = z[(z >= lo) & (z <= hi)]
    upper = np.minimum(z + t, PROFILE_WINDOW[1])
    return float(np.max(np.abs(_wgt(profile, upper) - _wgt(profile, z))))
