"""
Experiment Runners - One runner per experiment kind: windows, parameter grids, replica statistics
"""
import logging
from collections.abc import Callable
from itertools import product

import numpy as np

from core.exceptions import InvalidParameter
from experiments.seeding import derive_seed
from models.schemas import (
    ExperimentConfig,
    ExperimentKind,
    PointField,
    PolymerSide,
    Region,
    ScaledPoint,
)
from services.field_sampler import sample_field, window_region
from services.scaling import (
    local_position,
    min_tf_exceeds,
    modulus_statistic,
    mtf_estimate,
    polymer,
    tf_between,
    weight,
)
from services.weight_profile import weight_increment_statistic, weight_profile


logger = logging.getLogger(__name__)

ORIGIN = ScaledPoint(x=0.0, t=0.0)


def stat_key(name: str, value: float) -> str:
    """Statistic name for one threshold or position, e.g. exceeds@1.5; the value round-trips exactly"""
    return f"{name}@{float(value)!r}"


def split_key(key: str) -> tuple[str, float]:
    name, _, value = key.partition("@")
    return name, float(value)


class ExperimentRunner:
    """
    Base runner. Subclasses name the parameter axes they sweep, the regions
    a replica samples, and the statistics one replica reports.
    """

    kind: ExperimentKind
    axes: tuple[str, ...] = ("n", "t")

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def parameter_grid(self) -> list[dict[str, float]]:
        """Cartesian product of the swept axes, in config order"""
        lists = {
            "n": self.config.n_values,
            "t": self.config.t_values,
            "s": self.config.s_or_k_values,
        }
        return [
            dict(zip(self.axes, (float(v) for v in combo)))
            for combo in product(*(lists[axis] for axis in self.axes))
        ]

    def windows(self, params: dict[str, float]) -> list[Region]:
        return [self.window(params["n"], 0.0, params.get("t", 1.0))]

    def window(self, n: float, t_min: float, t_max: float, x_extent: float = 0.0) -> Region:
        return window_region(n, t_min, t_max, x_extent=x_extent, k_trunc=self.config.k_trunc)

    def estimate_points(self, params: dict[str, float]) -> float:
        """Expected points of the largest field one replica samples"""
        return max(self.config.rate * region.area for region in self.windows(params))

    def sample(self, params: dict[str, float], seed: int) -> PointField:
        return sample_field(self.windows(params)[0], rate=self.config.rate, seed=seed)

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        raise NotImplementedError


# =============================================================================
# Polymer geometry
# =============================================================================

class ModulusRunner(ExperimentRunner):
    """sup_z |rho(z + t) - rho(z)| for the leftmost polymer (0,0) -> (0,1)"""

    kind = ExperimentKind.MODULUS

    def windows(self, params: dict[str, float]) -> list[Region]:
        return [self.window(params["n"], 0.0, 1.0)]

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        field = self.sample(params, seed)
        p = polymer(field, params["n"], ORIGIN, ScaledPoint(x=0.0, t=1.0), PolymerSide.LEFTMOST)
        return {"modulus": modulus_statistic(p, params["t"], self.config.grid)}


class LocalFluctuationRunner(ExperimentRunner):
    """|rho(t)| for the leftmost polymer (0,0) -> (0,1) at small t"""

    kind = ExperimentKind.LOCAL_FLUCTUATION

    def windows(self, params: dict[str, float]) -> list[Region]:
        return [self.window(params["n"], 0.0, 1.0)]

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        field = self.sample(params, seed)
        p = polymer(field, params["n"], ORIGIN, ScaledPoint(x=0.0, t=1.0), PolymerSide.LEFTMOST)
        return {"local": abs(local_position(p, params["t"]))}


class MtfScalingRunner(ExperimentRunner):
    """TF between (0,0) and (0,t), and the MTF mesh estimate over the unit box"""

    kind = ExperimentKind.MTF_SCALING

    def windows(self, params: dict[str, float]) -> list[Region]:
        if not self.config.mesh:
            return [self.window(params["n"], 0.0, params["t"])]
        return [self.window(params["n"], 0.0, 1.0, x_extent=1.0)]

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        n, t = params["n"], params["t"]
        field = self.sample(params, seed)
        stats = {"tf": tf_between(field, n, ORIGIN, ScaledPoint(x=0.0, t=t))}
        if self.config.mesh:
            stats["mtf"] = mtf_estimate(field, n, t, self.config.psi, self.config.mesh_refine)
        return stats


class TfTailRunner(ExperimentRunner):
    """TF between (0,0) and (0,t) in units of t^{2/3}; thresholds are applied when summarising"""

    kind = ExperimentKind.TF_TAIL

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        n, t = params["n"], params["t"]
        field = self.sample(params, seed)
        tf = tf_between(field, n, ORIGIN, ScaledPoint(x=0.0, t=t))
        return {"tf": tf, "tf_scaled": tf / t ** (2 / 3)}


class MinTfLowerRunner(ExperimentRunner):
    """
    Whether every polymer (0,0) -> (0,t) leaves the strip of half width
    s t^{2/3}, for every s on one shared field.
    """

    kind = ExperimentKind.MIN_TF_LOWER

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        n, t = params["n"], params["t"]
        field = self.sample(params, seed)
        return {
            stat_key("exceeds", s): float(min_tf_exceeds(field, n, 0.0, t, s * t ** (2 / 3)))
            for s in self.config.s_or_k_values
        }


# =============================================================================
# Weights
# =============================================================================

class WeightIncrementRunner(ExperimentRunner):
    """sup_z |Wgt(z + t) - Wgt(z)| on the profile window [1, 2]"""

    kind = ExperimentKind.WEIGHT_INCREMENT

    def windows(self, params: dict[str, float]) -> list[Region]:
        return [self.window(params["n"], 0.0, 2.0)]

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        field = self.sample(params, seed)
        profile = weight_profile(field, params["n"])
        return {"increment": weight_increment_statistic(profile, params["t"])}


class WeightTailRunner(ExperimentRunner):
    """Weight (0,0) -> (0,t), raw and in units of t^{1/3}"""

    kind = ExperimentKind.WEIGHT_TAIL

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        n, t = params["n"], params["t"]
        field = self.sample(params, seed)
        w = weight(field, n, ORIGIN, ScaledPoint(x=0.0, t=t))
        return {"weight": w, "weight_scaled": w / t ** (1 / 3)}


class TwConvergenceRunner(ExperimentRunner):
    """Point-to-point weight (0,0) -> (0,1), compared across n and to the GUE edge"""

    kind = ExperimentKind.TW_CONVERGENCE
    axes = ("n",)

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        field = self.sample(params, seed)
        return {"weight": weight(field, params["n"], ORIGIN, ScaledPoint(x=0.0, t=1.0))}


class CurvatureRunner(ExperimentRunner):
    """Weights (x,0) -> (0,1) for every x on one field (common random numbers)"""

    kind = ExperimentKind.CURVATURE
    axes = ("n",)

    @property
    def x_values(self) -> list[float]:
        return curvature_positions(self.config.s_or_k_values)

    def windows(self, params: dict[str, float]) -> list[Region]:
        extent = max(abs(x) for x in self.x_values)
        return [self.window(params["n"], 0.0, 1.0, x_extent=extent)]

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        field = self.sample(params, seed)
        return curvature_weights(field, params["n"], self.x_values)


class ScalingPrincipleRunner(ExperimentRunner):
    """
    t^{-1/3} W over lifetime t at parameter n, and W over lifetime 1 at
    parameter nt, on two independent fields.
    """

    kind = ExperimentKind.SCALING_PRINCIPLE

    def windows(self, params: dict[str, float]) -> list[Region]:
        n, t = params["n"], params["t"]
        return [self.window(n, 0.0, t), self.window(n * t, 0.0, 1.0)]

    def run_replica(self, params: dict[str, float], seed: int) -> dict[str, float]:
        n, t = params["n"], params["t"]
        short_region, unit_region = self.windows(params)
        short_seed, unit_seed = (
            int(child.generate_state(1, dtype=np.uint64)[0])
            for child in np.random.SeedSequence(seed).spawn(2)
        )
        short_field = sample_field(short_region, rate=self.config.rate, seed=short_seed)
        unit_field = sample_field(unit_region, rate=self.config.rate, seed=unit_seed)
        return {
            "scaled_weight": weight(short_field, n, ORIGIN, ScaledPoint(x=0.0, t=t)) / t ** (1 / 3),
            "unit_weight": weight(unit_field, n * t, ORIGIN, ScaledPoint(x=0.0, t=1.0)),
        }


# =============================================================================
# Curvature helpers
# =============================================================================

def curvature_positions(x_values: list[float]) -> list[float]:
    """Requested positions with x = 0 always present, first occurrence order"""
    positions = [0.0]
    for x in x_values:
        if float(x) not in positions:
            positions.append(float(x))
    return positions


def curvature_weights(field: PointField, n: float, x_values: list[float]) -> dict[str, float]:
    end = ScaledPoint(x=0.0, t=1.0)
    return {
        stat_key("weight", x): weight(field, n, ScaledPoint(x=x, t=0.0), end)
        for x in x_values
    }


def curvature_profile(
    field_stream: Callable[[int], PointField],
    n: float,
    x_values: list[float],
    replicas: int,
    base_seed: int = 0
) -> list[tuple[float, float]]:
    """
    Monte Carlo mean weight (x,0) -> (0,1) per x. `field_stream` turns a
    replica seed into a fresh field; all x share that replica's field.
    """
    if replicas < 1:
        raise InvalidParameter(f"replicas must be positive, got {replicas}")

    totals = dict.fromkeys(x_values, 0.0)
    for replica in range(replicas):
        seed = derive_seed(base_seed, ExperimentKind.CURVATURE, {"n": n}, replica)
        field = field_stream(seed)
        weights = curvature_weights(field, n, list(x_values))
        for x in x_values:
            totals[x] += weights[stat_key("weight", x)]
    return [(x, totals[x] / replicas) for x in x_values]


# =============================================================================
# Registry
# =============================================================================

RUNNERS: dict[ExperimentKind, type[ExperimentRunner]] = {
    runner.kind: runner
    for runner in (
        ModulusRunner,
        LocalFluctuationRunner,
        MtfScalingRunner,
        TfTailRunner,
        MinTfLowerRunner,
        WeightIncrementRunner,
        WeightTailRunner,
        TwConvergenceRunner,
        CurvatureRunner,
        ScalingPrincipleRunner,
    )
}


def get_runner(config: ExperimentConfig) -> ExperimentRunner:
    """Create the runner registered for the config's experiment"""
    return RUNNERS[config.experiment](config)
