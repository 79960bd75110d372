"""
Core Application - Main orchestration logic for the LPP lab
"""
import asyncio
import logging
from pathlib import Path
from typing import Any

from core.config import LabSettings
from core.exceptions import InfeasibleError, SelftestFailure, UnknownCampaign
from core.selftest import run_selftest
from experiments.acceptance import summarize_campaign, validate_summary
from experiments.campaign import run_campaign
from models.schemas import (
    Chain,
    ExperimentConfig,
    PlanePoint,
    PointField,
    Polymer,
    PolymerSide,
    Region,
    ReplicaResult,
    ScaledPoint,
    WeightProfile,
)
from services.field_sampler import sample_field
from services.field_store import load_field, save_field
from services.lpp_solver import constrained_energy, energy, extremal_geodesic
from services.report_renderer import ReportRenderer
from services.result_store import CampaignStore
from services.scaling import mtf_estimate, polymer
from services.weight_profile import weight_profile


logger = logging.getLogger(__name__)


class LabApp:
    """Main application class the command line talks to"""

    def __init__(self, settings: LabSettings | None = None):
        self.settings = settings or LabSettings()
        self.renderer = ReportRenderer()

    # =========================================================================
    # Fields
    # =========================================================================

    def sample(self, region: Region, rate: float = 1.0, seed: int = 0) -> PointField:
        """Sample a field, refusing ones above the point cap"""
        expected = rate * region.area
        if expected > self.settings.point_cap:
            raise InfeasibleError(
                f"field would hold ~{expected:.3g} points, cap is {self.settings.point_cap:.3g}"
            )
        return sample_field(region, rate=rate, seed=seed)

    def load(self, path: str | Path) -> PointField:
        return load_field(path)

    def save(
        self,
        field: PointField,
        path: str | Path,
        metadata: dict[str, Any] | None = None
    ) -> Path:
        return save_field(field, path, metadata)

    # =========================================================================
    # Single-shot computations
    # =========================================================================

    def energy(
        self,
        field: PointField,
        u: PlanePoint,
        v: PlanePoint,
        allowed: Region | None = None
    ) -> int:
        if allowed is None:
            return energy(field, u, v)
        return constrained_energy(field, u, v, allowed)

    def geodesic(
        self,
        field: PointField,
        u: PlanePoint,
        v: PlanePoint,
        side: PolymerSide = PolymerSide.LEFTMOST
    ) -> Chain:
        """Uppermost geodesic for side=leftmost, lowermost for rightmost"""
        return extremal_geodesic(field, u, v, side)

    def polymer(
        self,
        field: PointField,
        n: float,
        u: ScaledPoint,
        v: ScaledPoint,
        side: PolymerSide = PolymerSide.LEFTMOST
    ) -> Polymer:
        return polymer(field, n, u, v, side)

    def profile(self, field: PointField, n: float) -> WeightProfile:
        return weight_profile(field, n)

    def mtf(
        self,
        field: PointField,
        n: float,
        t: float,
        psi: float | None = None,
        refine: int | None = None
    ) -> float:
        return mtf_estimate(
            field, n, t,
            psi=psi if psi is not None else self.settings.psi,
            refine=refine if refine is not None else self.settings.mesh_refine
        )

    # =========================================================================
    # Campaigns
    # =========================================================================

    def campaign(self, config: ExperimentConfig) -> tuple[list[ReplicaResult], dict[str, Any]]:
        """Run a campaign and summarise it against its acceptance rules"""
        results = run_campaign(config, workers=self.settings.workers)
        summary = summarize_campaign(config, results)
        validate_summary(summary)
        return results, summary

    def report(self, summary: dict[str, Any]) -> str:
        return self.renderer.render_campaign(summary)

    def archive(
        self,
        db_path: str,
        config: ExperimentConfig,
        results: list[ReplicaResult],
        summary: dict[str, Any]
    ) -> str:
        """Store a finished campaign; returns the campaign id"""
        store = CampaignStore(db_path)
        campaign_id = asyncio.run(store.save_campaign(config, results, summary))
        logger.info("campaign archived as %s in %s", campaign_id, db_path)
        return campaign_id

    def archived_campaigns(self, db_path: str, limit: int = 50) -> list[dict[str, Any]]:
        """Most recent campaigns in an archive, newest first"""
        return asyncio.run(self._open_store(db_path).list_campaigns(limit))

    def archived_campaign(
        self,
        db_path: str,
        campaign_id: str
    ) -> tuple[ExperimentConfig, list[ReplicaResult], dict[str, Any] | None]:
        stored = asyncio.run(self._open_store(db_path).get_campaign(campaign_id))
        if stored is None:
            raise UnknownCampaign(f"no campaign {campaign_id!r} in {db_path}")
        return stored

    @staticmethod
    def _open_store(db_path: str) -> CampaignStore:
        # reading never creates an archive
        if not Path(db_path).is_file():
            raise UnknownCampaign(f"no campaign archive at {db_path}")
        return CampaignStore(db_path)

    # =========================================================================
    # Self test
    # =========================================================================

    def selftest(self, instances: int = 200, seed: int = 0) -> list[dict[str, int | str]]:
        """One row per suite; raise_on_failures turns violations into an error"""
        return run_selftest(instances, seed)

    @staticmethod
    def raise_on_failures(report: list[dict[str, int | str]]) -> None:
        failing = [str(row["suite"]) for row in report if row["failures"]]
        if failing:
            raise SelftestFailure(f"self-test suites with violations: {', '.join(failing)}")
