"""
Result Store Service - Archive campaigns and their replica results in SQLite
"""
import json
from datetime import datetime
from typing import Any
from uuid import uuid4

import aiosqlite

from models.schemas import ExperimentConfig, ExperimentKind, ReplicaResult


class CampaignStore:
    """Campaign archive with SQLite backend"""

    def __init__(self, db_path: str = "lpp_lab.db"):
        self.db_path = db_path
        self._initialized = False

    async def initialize(self) -> None:
        """Initialize database tables"""
        if self._initialized:
            return

        async with aiosqlite.connect(self.db_path) as db:
            # Campaigns table
            await db.execute("""
                CREATE TABLE IF NOT EXISTS campaigns (
                    id TEXT PRIMARY KEY,
                    experiment TEXT NOT NULL,
                    created_at TEXT NOT NULL,
                    config TEXT NOT NULL,
                    summary TEXT
                )
            """)

            # Replicas table
            await db.execute("""
                CREATE TABLE IF NOT EXISTS replicas (
                    campaign_id TEXT NOT NULL,
                    parameter_index INTEGER NOT NULL,
                    replica_index INTEGER NOT NULL,
                    parameters TEXT NOT NULL,
                    derived_seed TEXT NOT NULL,
                    statistics TEXT NOT NULL,
                    PRIMARY KEY (campaign_id, parameter_index, replica_index),
                    FOREIGN KEY (campaign_id) REFERENCES campaigns(id)
                )
            """)

            await db.commit()

        self._initialized = True

    async def save_campaign(
        self,
        config: ExperimentConfig,
        results: list[ReplicaResult],
        summary: dict[str, Any] | None = None
    ) -> str:
        """Store a finished campaign; returns its id"""
        await self.initialize()

        campaign_id = str(uuid4())

        async with aiosqlite.connect(self.db_path) as db:
            await db.execute(
                """
                INSERT INTO campaigns (id, experiment, created_at, config, summary)
                VALUES (?, ?, ?, ?, ?)
                """,
                (
                    campaign_id,
                    config.experiment.value,
                    datetime.now().isoformat(),
                    config.model_dump_json(),
                    json.dumps(summary) if summary is not None else None
                )
            )
            # 64-bit seeds exceed SQLite's signed integer range; stored as text
            await db.executemany(
                """
                INSERT INTO replicas
                    (campaign_id, parameter_index, replica_index, parameters, derived_seed, statistics)
                VALUES (?, ?, ?, ?, ?, ?)
                """,
                [
                    (
                        campaign_id,
                        r.parameter_index,
                        r.replica_index,
                        json.dumps(r.parameters),
                        str(r.derived_seed),
                        json.dumps(r.statistics)
                    )
                    for r in results
                ]
            )
            await db.commit()

        return campaign_id

    async def get_campaign(
        self,
        campaign_id: str
    ) -> tuple[ExperimentConfig, list[ReplicaResult], dict[str, Any] | None] | None:
        """Get a campaign's config, ordered results and summary by ID"""
        await self.initialize()

        async with aiosqlite.connect(self.db_path) as db:
            db.row_factory = aiosqlite.Row
            async with db.execute(
                "SELECT * FROM campaigns WHERE id = ?",
                (campaign_id,)
            ) as cursor:
                row = await cursor.fetchone()

                if not row:
                    return None

                config = ExperimentConfig.model_validate_json(row["config"])
                summary = json.loads(row["summary"]) if row["summary"] else None

            async with db.execute(
                """
                SELECT * FROM replicas WHERE campaign_id = ?
                ORDER BY parameter_index, replica_index
                """,
                (campaign_id,)
            ) as cursor:
                rows = await cursor.fetchall()
                results = [self._row_to_result(config.experiment, dict(r)) for r in rows]

        return config, results, summary

    async def list_campaigns(self, limit: int = 50) -> list[dict[str, Any]]:
        """List recent campaigns"""
        await self.initialize()

        async with aiosqlite.connect(self.db_path) as db:
            db.row_factory = aiosqlite.Row
            async with db.execute(
                """
                SELECT id, experiment, created_at FROM campaigns
                ORDER BY created_at DESC LIMIT ?
                """,
                (limit,)
            ) as cursor:
                rows = await cursor.fetchall()
                return [dict(row) for row in rows]

    def _row_to_result(self, experiment: ExperimentKind, row: dict) -> ReplicaResult:
        """Convert database row to ReplicaResult object"""
        return ReplicaResult(
            experiment=experiment,
            parameter_index=row["parameter_index"],
            parameters=json.loads(row["parameters"]),
            replica_index=row["replica_index"],
            derived_seed=int(row["derived_seed"]),
            statistics=json.loads(row["statistics"])
        )
