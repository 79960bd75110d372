import asyncio

from experiments.acceptance import summarize_campaign
from experiments.campaign import run_campaign
from models.schemas import ExperimentConfig, ExperimentKind
from services.result_store import CampaignStore


def test_campaign_round_trip(tmp_path):
    config = ExperimentConfig(experiment=ExperimentKind.TW_CONVERGENCE, n_values=[20.0], replicas=3,
                              tw_samples=20, tw_matrix_dim=50)
    results = run_campaign(config)
    summary = summarize_campaign(config, results)
    store = CampaignStore(str(tmp_path / "lab.db"))

    async def scenario():
        campaign_id = await store.save_campaign(config, results, summary)
        stored = await store.get_campaign(campaign_id)
        listing = await store.list_campaigns()
        missing = await store.get_campaign("no-such-id")
        return campaign_id, stored, listing, missing

    campaign_id, stored, listing, missing = asyncio.run(scenario())
    loaded_config, loaded_results, loaded_summary = stored
    assert loaded_config == config
    assert loaded_results == results
    assert loaded_summary == summary
    assert [row["id"] for row in listing] == [campaign_id]
    assert missing is None


def test_seeds_above_signed_range_survive(tmp_path):
    config = ExperimentConfig(experiment=ExperimentKind.TW_CONVERGENCE, n_values=[20.0], replicas=8)
    results = run_campaign(config)
    store = CampaignStore(str(tmp_path / "lab.db"))

    async def scenario():
        campaign_id = await store.save_campaign(config, results)
        return await store.get_campaign(campaign_id)

    _, loaded, summary = asyncio.run(scenario())
    assert [r.derived_seed for r in loaded] == [r.derived_seed for r in results]
    assert summary is None
