"""
Statistics Service - Power-law and tail fits, KS distances, Tracy-Widom reference samples
"""
import logging
import math
from collections.abc import Sequence

import numpy as np
from scipy import linalg, stats

from core.exceptions import InsufficientData, InvalidParameter
from models.schemas import ExponentFit, TailEstimate


logger = logging.getLogger(__name__)

TAIL_WINDOW = (0.001, 0.5)


# =============================================================================
# Regression
# =============================================================================

def fit_power_law(points: Sequence[tuple[float, float]]) -> ExponentFit:
    """
    Least squares on (log x, log y). The slope estimates the exponent and
    stderr is the usual OLS standard error of the slope.
    """
    if len(points) < 3:
        raise InsufficientData(f"need at least 3 points for a power-law fit, got {len(points)}")
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise InvalidParameter("power-law fits need positive x and y values")

    log_x = np.log(xs)
    log_y = np.log(ys)
    if np.unique(log_x).size < 2:
        raise InsufficientData("power-law fit needs at least two distinct x values")

    result = stats.linregress(log_x, log_y)
    return ExponentFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        stderr=float(result.stderr),
        r_squared=float(result.rvalue) ** 2,
        points=list(zip(log_x.tolist(), log_y.tolist()))
    )


def log_correction_residuals(fit: ExponentFit, power: float) -> list[dict[str, float]]:
    """
    Residual of each fitted point next to the predicted log factor
    power * log(log(1/t)). Only points with t < 1 carry a factor.
    """
    rows = []
    for log_t, log_y in fit.points:
        if log_t >= 0:
            continue
        rows.append({
            "t": math.exp(log_t),
            "residual": log_y - (fit.intercept + fit.slope * log_t),
            "log_factor": power * math.log(-log_t)
        })
    return rows


# =============================================================================
# Tails
# =============================================================================

def tail_estimate(
    samples: Sequence[float] | np.ndarray,
    thresholds: Sequence[float],
    side: str = "upper",
    window: tuple[float, float] = TAIL_WINDOW
) -> TailEstimate:
    """
    Empirical P(X >= s) (side="upper") or P(X <= -s) (side="lower") at each
    threshold, keeping only thresholds with window[0] < P < window[1].
    """
    values = np.asarray(samples, dtype=np.float64)
    if values.size == 0:
        raise InsufficientData("tail estimate needs at least one sample")
    if side not in ("upper", "lower"):
        raise InvalidParameter(f"side must be 'upper' or 'lower', got {side!r}")

    lo, hi = window
    kept_s: list[float] = []
    kept_p: list[float] = []
    for s in sorted(thresholds):
        hits = values >= s if side == "upper" else values <= -s
        prob = float(np.mean(hits))
        if lo < prob < hi:
            kept_s.append(float(s))
            kept_p.append(prob)
        else:
            logger.info("threshold %s excluded from the %s tail: P=%.4g", s, side, prob)

    estimate = TailEstimate(
        thresholds=kept_s,
        survival_probs=kept_p,
        side=side,
        replicas=int(values.size)
    )
    if len(kept_s) >= 3:
        estimate = estimate.model_copy(update={"fitted_outer_exponent": fit_tail_exponent(estimate)})
    return estimate


def fit_tail_exponent(te: TailEstimate) -> float:
    """OLS slope of log(-log P) against log s: beta in P ~ exp(-c s^beta)"""
    usable = []
    for s, p in zip(te.thresholds, te.survival_probs):
        if not 0 < p < 1:
            logger.warning("tail threshold %s excluded: estimated probability %s", s, p)
            continue
        if s <= 0:
            raise InvalidParameter(f"tail thresholds must be positive, got {s}")
        usable.append((s, p))

    if len(usable) < 3:
        raise InsufficientData(f"need 3 thresholds with 0 < P < 1, got {len(usable)}")

    log_s = np.log([s for s, _ in usable])
    log_log_p = np.log(-np.log([p for _, p in usable]))
    return float(stats.linregress(log_s, log_log_p).slope)


def binomial_band(p: float, m: int) -> float:
    """Three standard deviations of a proportion estimated from m trials"""
    if m < 1:
        raise InvalidParameter(f"trial count must be positive, got {m}")
    return 3 * math.sqrt(max(p * (1 - p), 0.0) / m)


# =============================================================================
# Distributions
# =============================================================================

def ks_distance(sample1: Sequence[float], sample2: Sequence[float]) -> float:
    """Two-sample Kolmogorov-Smirnov sup distance between the empirical CDFs"""
    if len(sample1) == 0 or len(sample2) == 0:
        raise InsufficientData("KS distance needs two non-empty samples")
    return float(stats.ks_2samp(sample1, sample2).statistic)


def tw_reference_sample(m: int, matrix_dim: int = 400, seed: int = 0) -> np.ndarray:
    """
    m draws of (lambda_max - 2 sqrt(N)) N^{1/6} from the tridiagonal GUE
    model: N(0, 1) diagonal, chi_{2k}/sqrt(2) off-diagonal for k = N-1..1.
    The top eigenvalue comes from Sturm-sequence bisection.
    """
    if m < 1 or matrix_dim < 2:
        raise InvalidParameter(f"need m >= 1 and matrix_dim >= 2, got m={m}, N={matrix_dim}")
    if matrix_dim < 50:
        logger.warning("matrix_dim=%d is small; the edge law is far from its limit", matrix_dim)

    rng = np.random.default_rng(seed)
    dof = 2 * np.arange(matrix_dim - 1, 0, -1)
    top = matrix_dim - 1
    samples = np.empty(m, dtype=np.float64)
    for i in range(m):
        diag = rng.standard_normal(matrix_dim)
        off = np.sqrt(rng.chisquare(dof)) / math.sqrt(2.0)
        largest = linalg.eigvalsh_tridiagonal(
            diag, off,
            select="i",
            select_range=(top, top),
            lapack_driver="stebz"
        )
        samples[i] = largest[0]
    return (samples - 2 * math.sqrt(matrix_dim)) * matrix_dim ** (1 / 6)
