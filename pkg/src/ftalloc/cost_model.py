"""Resource oracle: allocation -> (physical qubits, runtime) -> scalar cost.

The synthetic surface-code model below stands in for a full resource
estimator.  It is deliberately coarse: integer code distances, integer
15-to-1 distillation levels and integer rotation T-counts make the cost a
step function of the allocation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Protocol, Union

import numpy as np

from .errors import InfeasibleBudget
from .simplex import Allocation, GameConfig

# Relative slack on threshold comparisons.  A target that equals a threshold
# mathematically (e.g. 1e-10 against 0.1 * 0.1**9) must not lose to round-off.
THRESHOLD_RTOL = 1e-12


@dataclass(frozen=True)
class CircuitProfile:
    name: str
    n_qubits: int
    depth: int
    t_count: int
    rotation_count: int
    p_phys: float = 1e-3
    p_threshold: float = 1e-2
    cycle_time_us: float = 1.0

    def __post_init__(self):
        if not self.name:
            raise ValueError("profile needs a name")
        if self.n_qubits < 1 or self.depth < 1:
            raise ValueError("n_qubits and depth must be at least 1")
        if self.t_count < 0 or self.rotation_count < 0:
            raise ValueError("gate counts must be nonnegative")
        if not 0.0 < self.p_phys < self.p_threshold < 1.0:
            raise ValueError("need 0 < p_phys < p_threshold < 1")
        if self.cycle_time_us <= 0:
            raise ValueError("cycle_time_us must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "CircuitProfile":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown profile fields: {sorted(unknown)}")
        ints = ("n_qubits", "depth", "t_count", "rotation_count")
        for key in ints:
            if key in data and (isinstance(data[key], bool) or not isinstance(data[key], int)):
                raise ValueError(f"{key} must be an integer")
        return cls(**data)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_profile(path: Union[str, Path]) -> CircuitProfile:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return CircuitProfile.from_dict(data)


@dataclass(frozen=True)
class ResourceEstimate:
    physical_qubits: float
    runtime_seconds: float

    def __post_init__(self):
        if not self.physical_qubits >= 1:
            raise ValueError(f"physical_qubits must be >= 1, got {self.physical_qubits}")
        if not self.runtime_seconds > 0:
            raise ValueError(f"runtime_seconds must be > 0, got {self.runtime_seconds}")


@dataclass(frozen=True)
class BudgetPartition:
    eps_logical: float
    eps_tstates: float
    eps_rotations: float


@dataclass(frozen=True)
class SurfaceCodeModel:
    """Constants of the synthetic estimator; all standard textbook forms."""

    prefactor: float = 0.1
    max_distance: int = 99
    rotation_c0: float = 1.0
    rotation_c1: float = 3.0
    distill_coeff: float = 35.0
    max_levels: int = 4
    factory_tiles: int = 15

    def distance_thresholds(self, p_phys: float, p_threshold: float) -> list[float]:
        """Logical error per operation for d = 3, 5, ..., max_distance."""
        ratio = p_phys / p_threshold
        return [self.prefactor * ratio ** ((d + 1) // 2) for d in range(3, self.max_distance + 1, 2)]

    def level_thresholds(self, p_phys: float) -> list[float]:
        """Output error per T state after 1, 2, ... rounds of 15-to-1."""
        c = self.distill_coeff
        return [(c * p_phys) ** (2**lvl) / c for lvl in range(1, self.max_levels + 1)]


DEFAULT_MODEL = SurfaceCodeModel()


def partition(s: Allocation, epsilon_total: float) -> BudgetPartition:
    return BudgetPartition(*(share * epsilon_total for share in s.as_tuple()))


def _first_below(thresholds: list[float], target: float) -> int:
    """Index of the first (decreasing) threshold met by ``target``; len() if none."""
    limit = target * (1.0 + THRESHOLD_RTOL)
    for idx, th in enumerate(thresholds):
        if th <= limit:
            return idx
    return len(thresholds)


def code_distance(
    per_op_target: float,
    p_phys: float = 1e-3,
    p_threshold: float = 1e-2,
    model: SurfaceCodeModel = DEFAULT_MODEL,
) -> int:
    """Smallest odd ``d >= 3`` with ``A (p/p_th)^((d+1)/2) <= per_op_target``."""
    if not 0.0 < per_op_target < 1.0:
        raise ValueError(f"per-operation target must lie in (0, 1), got {per_op_target}")
    if not p_phys < p_threshold:
        raise ValueError("physical error rate must be below threshold")
    thresholds = model.distance_thresholds(p_phys, p_threshold)
    idx = _first_below(thresholds, per_op_target)
    if idx == len(thresholds):
        raise InfeasibleBudget("distance overflow")
    return 3 + 2 * idx


def rotation_t_cost(per_rotation_target: float, model: SurfaceCodeModel = DEFAULT_MODEL) -> int:
    """T gates needed to synthesize one rotation to the given accuracy."""
    if not 0.0 < per_rotation_target < 1.0:
        raise ValueError(f"rotation target must lie in (0, 1), got {per_rotation_target}")
    return math.ceil(model.rotation_c0 + model.rotation_c1 * math.log2(1.0 / per_rotation_target))


def distillation_levels(
    per_t_target: float, p_phys: float = 1e-3, model: SurfaceCodeModel = DEFAULT_MODEL
) -> int:
    idx = _first_below(model.level_thresholds(p_phys), per_t_target)
    if idx == model.max_levels:
        raise InfeasibleBudget("distillation overflow")
    return idx + 1


def _estimate_rows(
    points: np.ndarray,
    profile: CircuitProfile,
    epsilon_total: float,
    model: SurfaceCodeModel,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized model; infeasible rows come back as ``inf``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    eps = points * epsilon_total
    n_rot = profile.rotation_count
    n_magic = profile.t_count + n_rot

    rot_targets = eps[:, 2] / max(n_rot, 1)
    per_rot = np.fromiter(
        (math.ceil(model.rotation_c0 + model.rotation_c1 * math.log2(1.0 / t)) for t in rot_targets),
        dtype=float,
        count=len(rot_targets),
    )
    total_t = profile.t_count + n_rot * per_rot

    d_th = np.asarray(model.distance_thresholds(profile.p_phys, profile.p_threshold))
    d_idx = np.searchsorted(-d_th, -(eps[:, 0] / (profile.n_qubits * profile.depth)) * (1.0 + THRESHOLD_RTOL))
    bad = d_idx >= len(d_th)
    d = 3.0 + 2.0 * d_idx
    tile = 2.0 * d * d

    if n_magic > 0:
        l_th = np.asarray(model.level_thresholds(profile.p_phys))
        per_t = eps[:, 1] / np.maximum(total_t, 1.0)
        l_idx = np.searchsorted(-l_th, -per_t * (1.0 + THRESHOLD_RTOL))
        bad |= l_idx >= len(l_th)
        levels = 1.0 + l_idx
    else:
        levels = np.zeros(len(points))

    qubits = profile.n_qubits * tile + levels * model.factory_tiles * tile
    cycles = np.maximum(profile.depth * d, total_t * levels * d)
    runtime = cycles * (profile.cycle_time_us * 1e-6)
    qubits[bad] = math.inf
    runtime[bad] = math.inf
    return qubits, runtime


class Oracle(Protocol):
    """Anything mapping an allocation to a :class:`ResourceEstimate`.

    Oracles may also offer ``estimate_batch(points, profile, epsilon_total)``
    returning ``(Q, R)`` arrays with ``inf`` marking infeasible rows.
    """

    reentrant: bool

    def estimate(self, s: Allocation, profile: CircuitProfile, epsilon_total: float) -> ResourceEstimate:
        ...


class SyntheticOracle:
    reentrant = True

    def __init__(self, model: SurfaceCodeModel = DEFAULT_MODEL):
        self.model = model

    @property
    def descriptor(self) -> str:
        return "synthetic"

    def estimate(self, s: Allocation, profile: CircuitProfile, epsilon_total: float) -> ResourceEstimate:
        q, r = _estimate_rows(s.as_array(), profile, epsilon_total, self.model)
        if not math.isfinite(q[0]):
            # re-derive which limit tripped, for the message
            eps = partition(s, epsilon_total)
            code_distance(eps.eps_logical / (profile.n_qubits * profile.depth),
                          profile.p_phys, profile.p_threshold, self.model)
            raise InfeasibleBudget("distillation overflow")
        return ResourceEstimate(float(q[0]), float(r[0]))

    def estimate_batch(self, points: np.ndarray, profile: CircuitProfile, epsilon_total: float):
        return _estimate_rows(points, profile, epsilon_total, self.model)


def estimate(
    s: Allocation,
    profile: CircuitProfile,
    cfg: GameConfig,
    model: SurfaceCodeModel = DEFAULT_MODEL,
) -> ResourceEstimate:
    return SyntheticOracle(model).estimate(s, profile, cfg.epsilon_total)


def cost(est: ResourceEstimate, w: float) -> float:
    """Weighted geometric mean ``Q^w R^(1-w)``."""
    if not 0.0 < w < 1.0:
        raise ValueError(f"weight must lie in (0, 1), got {w}")
    return est.physical_qubits**w * est.runtime_seconds ** (1.0 - w)


def cost_values(qubits: np.ndarray, runtime: np.ndarray, w: float) -> np.ndarray:
    """Elementwise :func:`cost` with identical rounding; ``inf`` passes through."""
    return np.fromiter(
        (q**w * r ** (1.0 - w) for q, r in zip(qubits.tolist(), runtime.tolist())),
        dtype=float,
        count=len(qubits),
    )


def space_time_volume(est: ResourceEstimate) -> float:
    return est.physical_qubits * est.runtime_seconds
