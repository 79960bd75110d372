"""
Pydantic models for the LPP lab
"""
import math
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.exceptions import (
    CoordinateCollision,
    InvalidParameter,
    InvalidRegion,
)


# =============================================================================
# Field Models
# =============================================================================

class PlanePoint(BaseModel):
    """A point of the unscaled plane"""
    model_config = ConfigDict(frozen=True)

    a: float
    b: float

    def precedes(self, other: "PlanePoint") -> bool:
        """Dominance order: self ≼ other"""
        return self.a <= other.a and self.b <= other.b

    def as_tuple(self) -> tuple[float, float]:
        return (self.a, self.b)


class RegionKind(str, Enum):
    RECTANGLE = "rectangle"
    DIAGONAL_STRIP = "diagonal_strip"
    HALF_PLANE = "half_plane"


class Region(BaseModel):
    """
    A closed planar region.

    rectangle: [a_lo, a_hi] x [b_lo, b_hi].
    diagonal_strip: 2n*t_min <= a+b <= 2n*t_max and |a-b| <= 2*half_width.
    half_plane: b - a <= offset; unbounded, usable only as a constraint.
    """
    model_config = ConfigDict(frozen=True)

    kind: RegionKind
    a_lo: float | None = None
    a_hi: float | None = None
    b_lo: float | None = None
    b_hi: float | None = None
    n: float | None = None
    half_width: float | None = None
    t_min: float = 0.0
    t_max: float | None = None
    offset: float | None = None

    @model_validator(mode="after")
    def _check_shape(self) -> "Region":
        if self.kind == RegionKind.RECTANGLE:
            bounds = (self.a_lo, self.a_hi, self.b_lo, self.b_hi)
            if any(v is None or not math.isfinite(v) for v in bounds):
                raise InvalidRegion(f"rectangle needs four finite bounds, got {bounds}")
            if not (self.a_lo < self.a_hi and self.b_lo < self.b_hi):
                raise InvalidRegion(f"rectangle has non-positive area: {bounds}")
        elif self.kind == RegionKind.DIAGONAL_STRIP:
            if self.n is None or self.half_width is None or self.t_max is None:
                raise InvalidRegion("diagonal strip needs n, half_width and t_max")
            if self.n <= 0:
                raise InvalidRegion(f"diagonal strip needs n > 0, got {self.n}")
            if self.half_width <= 0:
                raise InvalidRegion(f"half_width must be positive, got {self.half_width}")
            if not self.t_max > self.t_min:
                raise InvalidRegion(f"t_max must exceed t_min, got [{self.t_min}, {self.t_max}]")
        elif self.kind == RegionKind.HALF_PLANE:
            if self.offset is None or not math.isfinite(self.offset):
                raise InvalidRegion("half plane needs a finite offset")
        return self

    @classmethod
    def rectangle(cls, a_lo: float, a_hi: float, b_lo: float, b_hi: float) -> "Region":
        return cls(kind=RegionKind.RECTANGLE, a_lo=a_lo, a_hi=a_hi, b_lo=b_lo, b_hi=b_hi)

    @classmethod
    def diagonal_strip(
        cls,
        n: float,
        half_width: float,
        t_max: float,
        t_min: float = 0.0
    ) -> "Region":
        return cls(
            kind=RegionKind.DIAGONAL_STRIP,
            n=n,
            half_width=half_width,
            t_min=t_min,
            t_max=t_max
        )

    @classmethod
    def half_plane(cls, offset: float) -> "Region":
        return cls(kind=RegionKind.HALF_PLANE, offset=offset)

    @property
    def area(self) -> float:
        if self.kind == RegionKind.RECTANGLE:
            return (self.a_hi - self.a_lo) * (self.b_hi - self.b_lo)
        if self.kind == RegionKind.DIAGONAL_STRIP:
            # (a+b, a-b) coordinates have Jacobian 2
            return 2 * self.n * (self.t_max - self.t_min) * 4 * self.half_width / 2
        return math.inf

    def contains(self, a: Any, b: Any) -> Any:
        """Closed membership; vectorised over numpy arrays"""
        if self.kind == RegionKind.RECTANGLE:
            return (
                (a >= self.a_lo) & (a <= self.a_hi)
                & (b >= self.b_lo) & (b <= self.b_hi)
            )
        if self.kind == RegionKind.DIAGONAL_STRIP:
            s = a + b
            return (
                (s >= 2 * self.n * self.t_min) & (s <= 2 * self.n * self.t_max)
                & (np.abs(a - b) <= 2 * self.half_width)
            )
        return (b - a) <= self.offset

    def contains_point(self, p: PlanePoint) -> bool:
        return bool(self.contains(p.a, p.b))

    def covers(self, u: PlanePoint, v: PlanePoint) -> bool:
        """
        Whether a field on this region can answer questions about (u, v).
        Rectangles must contain the whole box [u, v]; strips and half planes
        only the endpoints, since truncation away from the chord is intended.
        """
        if self.kind == RegionKind.RECTANGLE:
            return (
                self.a_lo <= u.a and v.a <= self.a_hi
                and self.b_lo <= u.b and v.b <= self.b_hi
            )
        return self.contains_point(u) and self.contains_point(v)

    def describe(self) -> dict[str, Any]:
        return self.model_dump(mode="json", exclude_none=True)


class PointField(BaseModel):
    """A realised Poisson cloud, sorted strictly by the horizontal coordinate"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a: np.ndarray
    b: np.ndarray
    region: Region
    seed: int = 0
    rate: float = 1.0

    @field_validator("a", "b", mode="before")
    @classmethod
    def _as_float_array(cls, value: Any) -> np.ndarray:
        arr = np.ascontiguousarray(value, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_points(self) -> "PointField":
        if self.a.shape != self.b.shape:
            raise InvalidParameter(
                f"coordinate arrays differ in length: {self.a.size} vs {self.b.size}"
            )
        if self.rate <= 0:
            raise InvalidParameter(f"rate must be positive, got {self.rate}")
        if self.a.size == 0:
            return self
        if not np.all(np.isfinite(self.a)) or not np.all(np.isfinite(self.b)):
            raise InvalidParameter("field coordinates must be finite")
        if np.any(np.diff(self.a) <= 0):
            raise CoordinateCollision("horizontal coordinates must be strictly increasing")
        if np.unique(self.b).size != self.b.size:
            raise CoordinateCollision("two field points share a vertical coordinate")
        if not np.all(self.region.contains(self.a, self.b)):
            raise InvalidRegion("field has points outside its region")
        return self

    @classmethod
    def from_points(
        cls,
        points: list[PlanePoint] | list[tuple[float, float]],
        region: Region,
        seed: int = 0,
        rate: float = 1.0
    ) -> "PointField":
        """Build a field from unsorted points"""
        coords = [p.as_tuple() if isinstance(p, PlanePoint) else p for p in points]
        arr = np.array(coords, dtype=np.float64).reshape(-1, 2)
        order = np.argsort(arr[:, 0], kind="stable")
        return cls(a=arr[order, 0], b=arr[order, 1], region=region, seed=seed, rate=rate)

    @property
    def count(self) -> int:
        return int(self.a.size)

    @property
    def points(self) -> list[PlanePoint]:
        return [PlanePoint(a=a, b=b) for a, b in zip(self.a.tolist(), self.b.tolist())]


class Chain(BaseModel):
    """
    Increasing path from start to end through field points.

    interior holds every field point on the path except the end; when the
    start is itself a field point it appears as interior[0]. The energy is
    therefore len(interior), which keeps concatenation additive.
    """
    model_config = ConfigDict(frozen=True)

    start: PlanePoint
    end: PlanePoint
    interior: tuple[PlanePoint, ...] = ()

    @model_validator(mode="after")
    def _check_increasing(self) -> "Chain":
        if not self.start.precedes(self.end):
            raise InvalidParameter(f"chain start {self.start} does not precede end {self.end}")
        previous = self.start
        for i, p in enumerate(self.interior):
            if not previous.precedes(p):
                raise InvalidParameter(f"chain point {i} {p} does not dominate {previous}")
            if i > 0 and p == previous:
                raise InvalidParameter(f"chain point {i} repeats {p}")
            previous = p
        if not previous.precedes(self.end):
            raise InvalidParameter(f"last chain point {previous} does not precede end {self.end}")
        if self.interior and self.interior[-1] == self.end:
            raise InvalidParameter("the end point is never part of the interior")
        return self

    @property
    def energy(self) -> int:
        return len(self.interior)

    @property
    def path(self) -> list[PlanePoint]:
        """Vertices of the piecewise-affine path, endpoints included"""
        inner = list(self.interior)
        if inner and inner[0] == self.start:
            inner = inner[1:]
        return [self.start, *inner, self.end]

    def point_set(self) -> frozenset[PlanePoint]:
        return frozenset(self.interior)


# =============================================================================
# Scaled Models
# =============================================================================

class ScaledPoint(BaseModel):
    """A point in KPZ scaled coordinates: horizontal x, time t"""
    model_config = ConfigDict(frozen=True)

    x: float
    t: float


class PolymerSide(str, Enum):
    LEFTMOST = "leftmost"
    RIGHTMOST = "rightmost"


class Polymer(BaseModel):
    """Scaled piecewise-linear path, vertices stored eagerly as arrays"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: float = Field(gt=0)
    start: ScaledPoint
    end: ScaledPoint
    side: PolymerSide
    t: np.ndarray
    x: np.ndarray
    chain: Chain | None = None

    @model_validator(mode="after")
    def _check_vertices(self) -> "Polymer":
        if not self.start.t < self.end.t:
            raise InvalidParameter(f"polymer lifetime is empty: [{self.start.t}, {self.end.t}]")
        if self.t.shape != self.x.shape or self.t.size < 2:
            raise InvalidParameter("polymer needs at least its two endpoint vertices")
        if np.any(np.diff(self.t) <= 0):
            raise InvalidParameter("polymer vertices must be strictly increasing in t")
        if self.t[0] != self.start.t or self.t[-1] != self.end.t:
            raise InvalidParameter("polymer vertices must begin and end at its endpoints")
        if self.x[0] != self.start.x or self.x[-1] != self.end.x:
            raise InvalidParameter("polymer vertices must begin and end at its endpoints")
        return self

    @property
    def vertices(self) -> list[ScaledPoint]:
        return [ScaledPoint(x=x, t=t) for x, t in zip(self.x.tolist(), self.t.tolist())]

    @property
    def lifetime(self) -> tuple[float, float]:
        return (self.start.t, self.end.t)


class AdmissiblePair(BaseModel):
    """Endpoint pair with bounded inverse slope inside the unit box"""
    model_config = ConfigDict(frozen=True)

    u: ScaledPoint
    v: ScaledPoint
    psi: float = Field(gt=0)
    t_bound: float = Field(gt=0, le=1)

    @model_validator(mode="after")
    def _check_admissible(self) -> "AdmissiblePair":
        gap = self.v.t - self.u.t
        # mesh nodes are computed in floating point
        if not (0 < gap <= self.t_bound * (1 + 1e-12)):
            raise InvalidParameter(f"vertical gap {gap} outside (0, {self.t_bound}]")
        if abs(self.inv_slope) > self.psi * (1 + 1e-12):
            raise InvalidParameter(f"inverse slope {self.inv_slope} exceeds psi={self.psi}")
        for p in (self.u, self.v):
            if not (-1 <= p.x <= 1 and 0 <= p.t <= 1):
                raise InvalidParameter(f"endpoint {p} outside the unit box")
        return self

    @property
    def inv_slope(self) -> float:
        return (self.v.x - self.u.x) / (self.v.t - self.u.t)


class WeightProfile(BaseModel):
    """
    Jump structure of t -> X_(0,0)^(nt,nt) on [1, 2].

    base_value is X_n(1); values[i] is X_n just after jump_times[i].
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: float = Field(gt=0)
    base_value: int = Field(ge=0)
    jump_times: np.ndarray
    values: np.ndarray
    seed: int = 0
    k_trunc: float | None = None

    @model_validator(mode="after")
    def _check_jumps(self) -> "WeightProfile":
        if self.jump_times.shape != self.values.shape:
            raise InvalidParameter("jump_times and values differ in length")
        if self.jump_times.size:
            if self.jump_times[0] <= 1 or self.jump_times[-1] > 2:
                raise InvalidParameter("jump times must lie in (1, 2]")
            if np.any(np.diff(self.jump_times) <= 0):
                raise InvalidParameter("jump times must be strictly increasing")
            expected = self.base_value + np.arange(1, self.values.size + 1)
            if not np.array_equal(self.values, expected):
                raise InvalidParameter("every jump of the profile must have size one")
        return self

    @property
    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Interpolation nodes d_0=1, d_1..d_{m-1}, d_m=2 with X_n at each"""
        times = [1.0, *self.jump_times.tolist()]
        levels = [self.base_value, *self.values.tolist()]
        if times[-1] < 2.0:
            times.append(2.0)
            levels.append(levels[-1])
        return np.array(times), np.array(levels, dtype=np.float64)


# =============================================================================
# Lab Models
# =============================================================================

class ExperimentKind(str, Enum):
    MODULUS = "modulus"
    WEIGHT_INCREMENT = "weight_increment"
    MTF_SCALING = "mtf_scaling"
    TF_TAIL = "tf_tail"
    WEIGHT_TAIL = "weight_tail"
    CURVATURE = "curvature"
    TW_CONVERGENCE = "tw_convergence"
    SCALING_PRINCIPLE = "scaling_principle"
    MIN_TF_LOWER = "min_tf_lower"
    LOCAL_FLUCTUATION = "local_fluctuation"


# experiments whose t must lie strictly inside (0, 1)
OPEN_UNIT_T = {
    ExperimentKind.MODULUS,
    ExperimentKind.WEIGHT_INCREMENT,
    ExperimentKind.LOCAL_FLUCTUATION,
}


class ExperimentConfig(BaseModel):
    """Monte Carlo campaign description"""
    experiment: ExperimentKind
    n_values: list[float] = Field(min_length=1)
    t_values: list[float] = Field(default_factory=lambda: [1.0], min_length=1)
    s_or_k_values: list[float] = Field(default_factory=lambda: [1.0], min_length=1)
    replicas: int = Field(default=100, ge=1)
    base_seed: int = Field(default=0, ge=0)
    k_trunc: float = Field(default=12.0, gt=0)
    psi: float = Field(default=4.0, gt=0)
    mesh_refine: int = Field(default=4, ge=1)
    mesh: bool = True
    rate: float = Field(default=1.0, gt=0)
    point_cap: float = Field(default=5e7, gt=0)
    grid: int = Field(default=256, ge=1)
    tw_matrix_dim: int = Field(default=400, ge=2)
    tw_samples: int = Field(default=2000, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self) -> "ExperimentConfig":
        if any(n <= 0 for n in self.n_values):
            raise InvalidParameter(f"n_values must be positive: {self.n_values}")
        if self.experiment in OPEN_UNIT_T:
            if any(not 0 < t < 1 for t in self.t_values):
                raise InvalidParameter(
                    f"{self.experiment.value} needs t in (0, 1): {self.t_values}"
                )
        elif any(not 0 < t <= 1 for t in self.t_values):
            raise InvalidParameter(
                f"{self.experiment.value} needs t in (0, 1]: {self.t_values}"
            )
        if self.experiment == ExperimentKind.MTF_SCALING:
            if any(n <= self.psi ** 3 for n in self.n_values):
                raise InvalidParameter(f"mtf_scaling needs n > psi^3 = {self.psi ** 3}")
        if self.experiment in (ExperimentKind.TF_TAIL, ExperimentKind.WEIGHT_TAIL,
                               ExperimentKind.MIN_TF_LOWER):
            if any(s <= 0 for s in self.s_or_k_values):
                raise InvalidParameter(f"thresholds must be positive: {self.s_or_k_values}")
        return self


class ReplicaResult(BaseModel):
    """Statistics of one replica at one parameter combination"""
    experiment: ExperimentKind
    parameter_index: int = Field(ge=0)
    parameters: dict[str, float]
    replica_index: int = Field(ge=0)
    derived_seed: int = Field(ge=0)
    statistics: dict[str, float] = Field(default_factory=dict)


class ExponentFit(BaseModel):
    """Least squares fit on log-log axes"""
    slope: float
    intercept: float
    stderr: float = Field(ge=0)
    r_squared: float
    points: list[tuple[float, float]] = Field(min_length=3)


class TailEstimate(BaseModel):
    """Empirical survival probabilities and the fitted outer exponent"""
    thresholds: list[float]
    survival_probs: list[float]
    fitted_outer_exponent: float | None = None
    side: str = "upper"
    replicas: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_survival(self) -> "TailEstimate":
        if len(self.thresholds) != len(self.survival_probs):
            raise InvalidParameter("thresholds and survival_probs differ in length")
        if any(not 0 <= p <= 1 for p in self.survival_probs):
            raise InvalidParameter("survival probabilities must lie in [0, 1]")
        pairs = sorted(zip(self.thresholds, self.survival_probs))
        probs = [p for _, p in pairs]
        if any(later > earlier for earlier, later in zip(probs, probs[1:])):
            raise InvalidParameter("survival probabilities must be non-increasing")
        return self


# =============================================================================
# CLI Models
# =============================================================================

class Subcommand(str, Enum):
    SAMPLE = "sample"
    ENERGY = "energy"
    GEODESIC = "geodesic"
    POLYMER = "polymer"
    PROFILE = "profile"
    MTF = "mtf"
    CAMPAIGN = "campaign"
    ARCHIVE = "archive"
    SELFTEST = "selftest"


class CliConfig(BaseModel):
    """Fully resolved command line invocation"""
    subcommand: Subcommand
    flags: dict[str, str] = Field(default_factory=dict)
    config_file: str | None = None
