import logging
import math

import numpy as np
import pytest

from core.exceptions import InsufficientData, InvalidParameter
from models.schemas import TailEstimate
from services.statistics import (
    binomial_band,
    fit_power_law,
    fit_tail_exponent,
    ks_distance,
    log_correction_residuals,
    tail_estimate,
    tw_reference_sample,
)


# =============================================================================
# Power laws
# =============================================================================

def test_exact_power_law():
    fit = fit_power_law([(x, 2 * x ** 0.5) for x in (1, 2, 4, 8)])
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(2), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.stderr == pytest.approx(0.0, abs=1e-12)


def test_constant_has_zero_slope():
    fit = fit_power_law([(x, 3.0) for x in (1, 2, 4, 8)])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_log_correction_biases_the_slope_down():
    xs = [2.0 ** -k for k in range(4, 11)]
    fit = fit_power_law([(x, x ** (2 / 3) * math.log(1 / x) ** (1 / 3)) for x in xs])
    assert 0.55 <= fit.slope <= 0.67


def test_power_law_needs_three_points():
    with pytest.raises(InsufficientData):
        fit_power_law([(1, 1), (2, 2)])


def test_power_law_needs_positive_values():
    with pytest.raises(InvalidParameter):
        fit_power_law([(1, 1), (2, 0), (4, 3)])


def test_log_correction_residuals_skip_unit_times():
    fit = fit_power_law([(x, x ** 0.5) for x in (0.25, 0.5, 1.0)])
    rows = log_correction_residuals(fit, 1 / 3)
    assert [row["t"] for row in rows] == pytest.approx([0.25, 0.5])
    assert rows[0]["log_factor"] == pytest.approx(math.log(math.log(4)) / 3)
    assert all(abs(row["residual"]) < 1e-12 for row in rows)


# =============================================================================
# Tails
# =============================================================================

def synthetic_tail(survival, thresholds):
    return TailEstimate(thresholds=list(thresholds), survival_probs=[survival(s) for s in thresholds])


def test_cubic_tail_exponent():
    te = synthetic_tail(lambda s: math.exp(-s ** 3), (1, 1.2, 1.5, 2))
    assert fit_tail_exponent(te) == pytest.approx(3.0, abs=1e-9)


def test_three_halves_tail_exponent():
    te = synthetic_tail(lambda s: math.exp(-2 * s ** 1.5), (1, 1.2, 1.5, 2))
    assert fit_tail_exponent(te) == pytest.approx(1.5, abs=1e-9)


def test_noisy_cubic_tail():
    rng = np.random.default_rng(0)
    m = 10_000
    thresholds = np.linspace(1.0, 1.8, 5)
    probs = [rng.binomial(m, math.exp(-s ** 3)) / m for s in thresholds]
    te = TailEstimate(thresholds=thresholds.tolist(), survival_probs=probs)
    assert 2.5 <= fit_tail_exponent(te) <= 3.5


def test_degenerate_probabilities_are_excluded(caplog):
    te = TailEstimate(thresholds=[1, 1.2, 1.5, 2, 3], survival_probs=[math.exp(-s ** 3) for s in (1, 1.2, 1.5, 2)] + [0.0])
    with caplog.at_level(logging.WARNING):
        assert fit_tail_exponent(te) == pytest.approx(3.0, abs=1e-9)
    assert "excluded" in caplog.text


def test_too_few_usable_thresholds():
    te = TailEstimate(thresholds=[1, 2, 3], survival_probs=[1.0, 0.5, 0.0])
    with pytest.raises(InsufficientData):
        fit_tail_exponent(te)


def test_tail_estimate_keeps_the_fitting_window():
    samples = np.arange(1000) / 1000
    te = tail_estimate(samples, [0.1, 0.6, 0.7, 0.8, 0.9995], side="upper")
    assert te.thresholds == [0.6, 0.7, 0.8]
    assert te.survival_probs == pytest.approx([0.4, 0.3, 0.2])
    assert te.fitted_outer_exponent is not None
    assert te.replicas == 1000


def test_lower_tail_counts_negative_values():
    samples = -np.arange(1000) / 1000
    te = tail_estimate(samples, [0.6, 0.7, 0.8], side="lower")
    assert te.survival_probs == pytest.approx([0.4, 0.3, 0.2])


def test_tail_estimate_without_enough_thresholds():
    te = tail_estimate(np.arange(100) / 100, [0.6], side="upper")
    assert te.fitted_outer_exponent is None


def test_survival_must_not_increase():
    with pytest.raises(InvalidParameter):
        TailEstimate(thresholds=[1, 2], survival_probs=[0.1, 0.2])


def test_binomial_band():
    assert binomial_band(0.5, 100) == pytest.approx(0.15)
    assert binomial_band(0.0, 100) == 0.0


# =============================================================================
# Distributions
# =============================================================================

def test_ks_examples():
    assert ks_distance([1, 2, 3], [1, 2, 4]) == pytest.approx(1 / 3)
    assert ks_distance([1, 2, 3], [1, 2, 3]) == 0.0
    assert ks_distance([1, 2], [5, 6, 7]) == 1.0


def test_ks_needs_samples():
    with pytest.raises(InsufficientData):
        ks_distance([], [1.0])


def test_tw_reference_is_deterministic():
    first = tw_reference_sample(20, matrix_dim=60, seed=3)
    second = tw_reference_sample(20, matrix_dim=60, seed=3)
    assert np.array_equal(first, second)
    assert not np.array_equal(first, tw_reference_sample(20, matrix_dim=60, seed=4))


def test_tw_reference_sits_near_the_edge_law():
    sample = tw_reference_sample(500, matrix_dim=100, seed=0)
    # GUE Tracy-Widom mean is about -1.77, standard deviation about 0.9
    assert -2.2 <= sample.mean() <= -1.4
    assert 0.6 <= sample.std() <= 1.2


def test_tw_reference_rejects_bad_sizes():
    with pytest.raises(InvalidParameter):
        tw_reference_sample(0)
