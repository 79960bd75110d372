"""
Campaign Runner - Reproducible Monte Carlo campaigns over a worker pool
"""
import logging
from concurrent.futures import ProcessPoolExecutor

from core.exceptions import InfeasibleCampaign, InvalidParameter
from experiments.runners import get_runner
from experiments.seeding import derive_seed
from models.schemas import ExperimentConfig, ReplicaResult


logger = logging.getLogger(__name__)

Task = tuple[ExperimentConfig, int, dict[str, float], int]


def run_campaign(config: ExperimentConfig, workers: int = 1) -> list[ReplicaResult]:
    """
    One ReplicaResult per (parameter combination, replica), ordered by
    (parameter_index, replica_index). Output depends only on the config.
    """
    if workers < 1:
        raise InvalidParameter(f"workers must be positive, got {workers}")

    # Step 1: parameter grid
    runner = get_runner(config)
    grid = runner.parameter_grid()

    # Step 2: memory guard before any sampling
    for params in grid:
        expected = runner.estimate_points(params)
        if expected > config.point_cap:
            raise InfeasibleCampaign(
                f"{config.experiment.value} at {params} needs ~{expected:.3g} points per field, "
                f"cap is {config.point_cap:.3g}"
            )

    # Step 3: tasks keyed by (parameter_index, replica_index)
    tasks: list[Task] = [
        (config, index, params, replica)
        for index, params in enumerate(grid)
        for replica in range(config.replicas)
    ]
    logger.info(
        "campaign %s: %d parameter combinations x %d replicas on %d worker(s)",
        config.experiment.value, len(grid), config.replicas, workers
    )

    # Step 4: execute; map preserves task order whatever the schedule
    if workers == 1:
        results = [run_task(task) for task in tasks]
    else:
        chunk = max(1, len(tasks) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_task, tasks, chunksize=chunk))

    logger.info("campaign %s finished: %d replica results", config.experiment.value, len(results))
    return results


def run_task(task: Task) -> ReplicaResult:
    config, index, params, replica = task
    seed = derive_seed(config.base_seed, config.experiment, params, replica)
    statistics = get_runner(config).run_replica(params, seed)
    logger.debug("replica %d of combination %d done", replica, index)
    return ReplicaResult(
        experiment=config.experiment,
        parameter_index=index,
        parameters=params,
        replica_index=replica,
        derived_seed=seed,
        statistics=statistics
    )
