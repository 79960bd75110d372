"""
Desk-scale statistical checks. Each campaign takes minutes; run with --runslow.
"""
import os

import pytest

from core.app import LabApp
from core.config import LabSettings
from experiments.acceptance import FAIL
from models.schemas import ExperimentConfig, ExperimentKind


pytestmark = pytest.mark.slow

WORKERS = max(1, (os.cpu_count() or 1) - 1)


def run(**values):
    app = LabApp(LabSettings(workers=WORKERS))
    _, summary = app.campaign(ExperimentConfig(**values))
    return summary


def failing(summary):
    return [rule for rule in summary["rules"] if rule["status"] == FAIL]


def test_transversal_exponent():
    summary = run(
        experiment=ExperimentKind.MTF_SCALING,
        n_values=[4000.0],
        t_values=[2.0 ** -k for k in range(1, 6)],
        replicas=200,
        mesh=False
    )
    assert not failing(summary)


def test_weight_increment_exponent():
    summary = run(
        experiment=ExperimentKind.WEIGHT_INCREMENT,
        n_values=[2000.0],
        t_values=[2.0 ** -k for k in range(2, 7)],
        replicas=200
    )
    assert not failing(summary)


def test_polymer_modulus_exponent():
    summary = run(
        experiment=ExperimentKind.MODULUS,
        n_values=[2000.0],
        t_values=[2.0 ** -k for k in range(2, 7)],
        replicas=200
    )
    assert not failing(summary)


def test_transversal_tail_is_cubic():
    summary = run(
        experiment=ExperimentKind.TF_TAIL,
        n_values=[2000.0],
        s_or_k_values=[0.2 + 0.1 * i for i in range(15)],
        replicas=10_000
    )
    assert not failing(summary)


def test_weight_lower_tail_exponent():
    summary = run(
        experiment=ExperimentKind.WEIGHT_TAIL,
        n_values=[2000.0],
        s_or_k_values=[0.5 + 0.25 * i for i in range(16)],
        replicas=10_000
    )
    lower = [r for r in summary["rules"] if r["name"].startswith("weight_lower_tail")]
    assert lower and all(r["status"] != FAIL for r in lower)


def test_parabolic_curvature():
    summary = run(
        experiment=ExperimentKind.CURVATURE,
        n_values=[2000.0],
        s_or_k_values=[0.5, 1.0, 1.5, -0.5, -1.0, -1.5],
        replicas=500
    )
    assert not failing(summary)


def test_tracy_widom_convergence():
    summary = run(
        experiment=ExperimentKind.TW_CONVERGENCE,
        n_values=[1000.0, 4000.0],
        replicas=2000,
        tw_samples=2000,
        tw_matrix_dim=400
    )
    assert not failing(summary)


def test_scaling_principle():
    summary = run(
        experiment=ExperimentKind.SCALING_PRINCIPLE,
        n_values=[2000.0],
        t_values=[0.5],
        replicas=2000
    )
    assert not failing(summary)


def test_min_tf_lower_bound_direction():
    summary = run(
        experiment=ExperimentKind.MIN_TF_LOWER,
        n_values=[2000.0],
        s_or_k_values=[0.25, 0.5, 1.0, 1.5, 2.0],
        replicas=10_000
    )
    assert not failing(summary)
