import pytest

from core.exceptions import UsageError
from experiments.acceptance import summarize_campaign
from models.schemas import ExperimentConfig, ExperimentKind, ReplicaResult
from services.report_renderer import ReportRenderer


@pytest.fixture
def renderer():
    return ReportRenderer()


@pytest.fixture
def summary():
    config = ExperimentConfig(experiment=ExperimentKind.MODULUS, n_values=[100.0], t_values=[0.1, 0.2, 0.4], replicas=1)
    results = [
        ReplicaResult(
            experiment=config.experiment,
            parameter_index=i,
            parameters={"n": 100.0, "t": t},
            replica_index=0,
            derived_seed=i,
            statistics={"modulus": t ** (2 / 3)}
        )
        for i, t in enumerate(config.t_values)
    ]
    return summarize_campaign(config, results)


def test_campaign_report_lists_rules_and_fits(renderer, summary):
    report = renderer.render_campaign(summary)
    assert report.startswith("# Campaign report: modulus")
    assert "polymer_modulus_exponent[n=100]" in report
    assert "| pass |" in report
    assert "## Exponent fits" in report
    assert "0.6667" in report
    assert '"base_seed": 0' in report


def test_missing_data_is_a_usage_error(renderer):
    with pytest.raises(UsageError):
        renderer.render_campaign({"experiment": "modulus"})


def test_broken_template_is_a_usage_error(renderer, summary):
    with pytest.raises(UsageError, match="syntax error"):
        renderer.render_campaign(summary, template="{% for x in %}")


def test_format_number_filter(renderer):
    assert renderer.render("{{ v | format_number }}", {"v": None}) == "-"
    assert renderer.render("{{ v | format_number }}", {"v": 2 / 3}) == "0.6667"
