import pytest

from core.exceptions import SummarySchemaError
from experiments.acceptance import FAIL, FLAGGED, PASS, summarize_campaign, validate_summary
from experiments.campaign import run_campaign
from experiments.runners import stat_key
from models.schemas import ExperimentConfig, ExperimentKind, ReplicaResult


def synthetic(config, statistic):
    """Replica results whose statistics come from statistic(params, replica)"""
    results = []
    grid = [{"n": n, "t": t} for n in config.n_values for t in config.t_values]
    for index, params in enumerate(grid):
        for replica in range(config.replicas):
            results.append(ReplicaResult(
                experiment=config.experiment,
                parameter_index=index,
                parameters=params,
                replica_index=replica,
                derived_seed=replica,
                statistics=statistic(params, replica)
            ))
    return results


def rule(summary, prefix):
    return next(r for r in summary["rules"] if r["name"].startswith(prefix))


def test_modulus_with_two_thirds_slope_passes():
    config = ExperimentConfig(
        experiment=ExperimentKind.MODULUS, n_values=[100.0], t_values=[0.05, 0.1, 0.2, 0.4], replicas=3
    )
    summary = summarize_campaign(config, synthetic(config, lambda p, r: {"modulus": p["t"] ** (2 / 3)}))
    validate_summary(summary)
    assert rule(summary, "polymer_modulus_exponent")["status"] == PASS
    assert summary["fits"][0]["slope"] == pytest.approx(2 / 3)
    assert summary["passed"] is True


def test_slope_outside_bracket_fails():
    config = ExperimentConfig(
        experiment=ExperimentKind.WEIGHT_INCREMENT, n_values=[100.0], t_values=[0.1, 0.2, 0.4], replicas=2
    )
    summary = summarize_campaign(config, synthetic(config, lambda p, r: {"increment": p["t"]}))
    assert rule(summary, "weight_increment_exponent")["status"] == FAIL
    assert summary["passed"] is False


def test_too_few_times_are_flagged():
    config = ExperimentConfig(
        experiment=ExperimentKind.MODULUS, n_values=[100.0], t_values=[0.1, 0.2], replicas=2
    )
    summary = summarize_campaign(config, synthetic(config, lambda p, r: {"modulus": p["t"]}))
    validate_summary(summary)
    assert rule(summary, "polymer_modulus_exponent")["status"] == FLAGGED
    assert summary["fits"] == []


def test_parabolic_curvature_passes():
    config = ExperimentConfig(
        experiment=ExperimentKind.CURVATURE, n_values=[100.0], s_or_k_values=[0.5, 1.0, -1.0], replicas=4
    )

    def weights(params, replica):
        noise = 0.01 * (replica - 1.5)
        return {stat_key("weight", x): -x * x + noise for x in (0.0, 0.5, 1.0, -1.0)}

    summary = summarize_campaign(config, synthetic(config, weights))
    validate_summary(summary)
    statuses = {r["name"]: r["status"] for r in summary["rules"]}
    assert statuses["parabolic_curvature[n=100,x=1]"] == PASS
    assert statuses["reflection_symmetry[n=100,x=1]"] == PASS
    assert summary["passed"] is True


def test_min_tf_tail_exponent_is_advisory():
    config = ExperimentConfig(
        experiment=ExperimentKind.MIN_TF_LOWER, n_values=[100.0], s_or_k_values=[0.5, 1.0], replicas=4
    )
    summary = summarize_campaign(
        config, synthetic(config, lambda p, r: {"exceeds@0.5": 1.0, "exceeds@1.0": float(r < 2)})
    )
    validate_summary(summary)
    assert rule(summary, "min_tf_positive")["status"] == PASS
    assert rule(summary, "min_tf_monotone")["status"] == PASS
    assert rule(summary, "min_tf_tail_exponent")["status"] == FLAGGED
    assert summary["passed"] is True


def test_empty_results_still_validate():
    config = ExperimentConfig(experiment=ExperimentKind.TF_TAIL, n_values=[100.0])
    summary = summarize_campaign(config, [])
    validate_summary(summary)
    assert summary["rules"] == []


TINY_CAMPAIGNS = [
    dict(experiment=ExperimentKind.MODULUS, n_values=[30.0], t_values=[0.1, 0.2, 0.4]),
    dict(experiment=ExperimentKind.LOCAL_FLUCTUATION, n_values=[30.0], t_values=[0.1, 0.2, 0.4]),
    dict(experiment=ExperimentKind.WEIGHT_INCREMENT, n_values=[20.0], t_values=[0.1, 0.2, 0.4]),
    dict(experiment=ExperimentKind.MTF_SCALING, n_values=[70.0], t_values=[0.25, 0.5, 1.0], mesh=False),
    dict(experiment=ExperimentKind.TF_TAIL, n_values=[30.0], s_or_k_values=[0.1, 0.3, 0.5, 1.0]),
    dict(experiment=ExperimentKind.WEIGHT_TAIL, n_values=[30.0], s_or_k_values=[0.5, 1.0, 2.0]),
    dict(experiment=ExperimentKind.CURVATURE, n_values=[30.0], s_or_k_values=[0.5, -0.5]),
    dict(experiment=ExperimentKind.TW_CONVERGENCE, n_values=[20.0, 30.0], tw_samples=50, tw_matrix_dim=50),
    dict(experiment=ExperimentKind.SCALING_PRINCIPLE, n_values=[30.0], t_values=[0.5]),
    dict(experiment=ExperimentKind.MIN_TF_LOWER, n_values=[30.0], s_or_k_values=[0.1, 0.5, 1.0, 2.0]),
]


@pytest.mark.parametrize("values", TINY_CAMPAIGNS, ids=lambda v: v["experiment"].value)
@pytest.mark.parametrize("base_seed", [0, 1])
def test_summaries_follow_the_schema(values, base_seed):
    config = ExperimentConfig(replicas=6, base_seed=base_seed, **values)
    summary = summarize_campaign(config, run_campaign(config))
    validate_summary(summary)
    assert summary["experiment"] == config.experiment.value
    assert len(summary["combinations"]) == len(set(r["parameter_index"] for r in summary["combinations"]))


def test_schema_violation_names_its_location():
    config = ExperimentConfig(
        experiment=ExperimentKind.MODULUS, n_values=[100.0], t_values=[0.05, 0.1, 0.2, 0.4], replicas=3
    )
    summary = summarize_campaign(config, synthetic(config, lambda p, r: {"modulus": p["t"] ** (2 / 3)}))
    summary["rules"][0]["status"] = "maybe"
    with pytest.raises(SummarySchemaError, match="rules/0/status"):
        validate_summary(summary)
