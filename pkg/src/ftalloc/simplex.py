"""Strategy profiles on the floor-constrained 2-simplex.

Three players split a unit budget: logical error correction (L), T-state
distillation (T) and rotation synthesis (R).  Every profile keeps each share
at or above a floor ``eps_min`` so that the downstream estimator never sees a
zero budget.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AllocationError

SUM_TOL = 1e-12


class PlayerId(enum.IntEnum):
    L = 0
    T = 1
    R = 2

    @property
    def opponents(self) -> tuple["PlayerId", "PlayerId"]:
        j, k = (p for p in PlayerId if p != self)
        return j, k


PLAYERS = (PlayerId.L, PlayerId.T, PlayerId.R)


@dataclass(frozen=True)
class GameConfig:
    """Solver hyperparameters.

    ``xtol``, ``max_eval`` and ``scan_points`` control each best response;
    ``scan_points=0`` disables the bracketing scan and leaves Brent alone on
    the full interval.
    """

    epsilon_total: float = 0.1
    eps_min: float = 0.005
    weight: float = 0.5
    restarts: int = 16
    max_sweeps: int = 100
    tol_delta: float = 1e-6
    rng_seed: int = 0
    xtol: float = 1e-6
    max_eval: int = 100
    scan_points: int = 2001
    relative_delta: bool = False

    def __post_init__(self):
        if not 0.0 < self.epsilon_total < 1.0:
            raise ValueError(f"epsilon_total must lie in (0, 1), got {self.epsilon_total}")
        if not 0.0 < self.eps_min < 1.0 / 3.0:
            raise ValueError(f"eps_min must lie in (0, 1/3), got {self.eps_min}")
        if not 0.0 < self.weight < 1.0:
            raise ValueError(f"weight must lie in (0, 1), got {self.weight}")
        if self.restarts < 1 or self.max_sweeps < 1:
            raise ValueError("restarts and max_sweeps must be positive")
        if self.tol_delta < 0:
            raise ValueError("tol_delta must be nonnegative")
        if self.xtol <= 0 or self.max_eval < 3:
            raise ValueError("xtol must be positive and max_eval at least 3")
        if self.scan_points != 0 and self.scan_points < 3:
            raise ValueError("scan_points must be 0 or at least 3")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GameConfig":
        return cls(**data)


@dataclass(frozen=True)
class Allocation:
    """A feasible profile ``(s_L, s_T, s_R)``, validated on construction."""

    logical: float
    tstate: float
    rotation: float
    eps_min: float = field(default=0.005, compare=False, repr=False)

    def __post_init__(self):
        vals = self.as_tuple()
        if not all(math.isfinite(v) for v in vals):
            raise AllocationError(f"non-finite component in {vals}")
        total = math.fsum(vals)
        if abs(total - 1.0) > SUM_TOL:
            raise AllocationError(f"components sum to {total!r}, not 1")
        upper = 1.0 - 2.0 * self.eps_min + SUM_TOL
        for v in vals:
            if v < self.eps_min:
                raise AllocationError(f"component {v!r} below floor {self.eps_min}")
            if v > upper:
                raise AllocationError(f"component {v!r} above 1 - 2*eps_min")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.logical, self.tstate, self.rotation)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    def __getitem__(self, player: int) -> float:
        return self.as_tuple()[player]

    def __iter__(self):
        return iter(self.as_tuple())

    @classmethod
    def from_sequence(cls, values: Sequence[float], eps_min: float = 0.005) -> "Allocation":
        a, b, c = (float(v) for v in values)
        return cls(a, b, c, eps_min=eps_min)


def uniform(eps_min: float = 0.005) -> Allocation:
    if eps_min > 1.0 / 3.0:
        raise AllocationError("infeasible floor")
    third = 1.0 / 3.0
    return Allocation(third, third, third, eps_min=eps_min)


def _already_feasible(vals: Sequence[float], eps_min: float) -> bool:
    return (
        all(v >= eps_min for v in vals)
        and all(v <= 1.0 - 2.0 * eps_min + SUM_TOL for v in vals)
        and abs(math.fsum(vals) - 1.0) <= SUM_TOL
    )


def clip_renormalize(raw: Iterable[float], eps_min: float = 0.005) -> Allocation:
    """Project a nonnegative triple onto the floor-constrained simplex.

    The triple is scaled to unit sum, clipped into ``[eps_min, 1]`` and
    rescaled.  Rescaling can push a clipped component back under the floor, so those are
    pinned at ``eps_min`` and the remaining mass is shared proportionally by
    the others.  Each pass pins at least one new component, so three passes
    always suffice.  A feasible input is returned unchanged.
    """
    vals = [float(v) for v in raw]
    if len(vals) != 3:
        raise AllocationError(f"expected three components, got {len(vals)}")
    if eps_min >= 1.0 / 3.0:
        raise AllocationError("infeasible floor")
    if any(not math.isfinite(v) or v < 0 for v in vals):
        raise AllocationError(f"components must be finite and nonnegative: {vals}")
    if not any(v > 0 for v in vals):
        raise AllocationError("degenerate profile")
    if _already_feasible(vals, eps_min):
        return Allocation.from_sequence(vals, eps_min)

    total = sum(vals)
    vals = [min(max(v / total, eps_min), 1.0) for v in vals]
    total = sum(vals)
    vals = [v / total for v in vals]
    pinned: set[int] = set()
    for _ in range(3):
        low = {i for i, v in enumerate(vals) if v < eps_min and i not in pinned}
        if not low:
            break
        pinned |= low
        free = [i for i in range(3) if i not in pinned]
        mass = 1.0 - eps_min * len(pinned)
        free_total = sum(vals[i] for i in free)
        for i in pinned:
            vals[i] = eps_min
        for i in free:
            vals[i] = vals[i] * mass / free_total
    return Allocation.from_sequence(vals, eps_min)


def opponent_ratio(s: Allocation, player: PlayerId) -> float:
    j, k = player.opponents
    return s[j] / (s[j] + s[k])


def deviation_interval(s: Allocation, player: PlayerId) -> tuple[float, float]:
    """Largest ``[lo, hi]`` of own shares keeping both opponents on the floor."""
    eps = s.eps_min
    rho = opponent_ratio(s, player)
    hi = min(1.0 - 2.0 * eps, 1.0 - eps / rho, 1.0 - eps / (1.0 - rho))
    # round-off in 1 - eps/rho can leave an opponent a hair under the floor
    while hi > eps and (rho * (1.0 - hi) < eps or (1.0 - rho) * (1.0 - hi) < eps):
        hi = math.nextafter(hi, -math.inf)
    return eps, max(hi, eps)


def deviate(s: Allocation, player: PlayerId, x: float) -> Allocation:
    """Move ``player`` to share ``x``, rescaling opponents at their current ratio."""
    eps = s.eps_min
    if not eps <= x <= 1.0 - 2.0 * eps:
        raise AllocationError(f"share {x!r} outside [{eps}, {1.0 - 2.0 * eps}]")
    return Allocation.from_sequence(_deviate_row(s, player, x), eps)


def _deviate_row(s: Allocation, player: PlayerId, x: float) -> list[float]:
    j, k = player.opponents
    rho = opponent_ratio(s, player)
    rest = 1.0 - x
    out = [0.0, 0.0, 0.0]
    out[player] = x
    out[j] = rho * rest
    out[k] = (1.0 - rho) * rest
    if out[j] < s.eps_min or out[k] < s.eps_min:
        raise AllocationError("opponent floor violated")
    return out


def deviate_many(s: Allocation, player: PlayerId, xs: np.ndarray) -> np.ndarray:
    """Row-wise :func:`deviate` without validation; same arithmetic, bit for bit."""
    j, k = player.opponents
    rho = opponent_ratio(s, player)
    xs = np.asarray(xs, dtype=float)
    rest = 1.0 - xs
    out = np.empty((xs.size, 3))
    out[:, player] = xs
    out[:, j] = rho * rest
    out[:, k] = (1.0 - rho) * rest
    return out


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    """Independent stream per restart; adding restarts leaves earlier ones intact."""
    return np.random.default_rng([seed & 0xFFFF_FFFF_FFFF_FFFF, restart])


def sample_dirichlet_111(rng: np.random.Generator, eps_min: float = 0.005) -> Allocation:
    draws = rng.standard_exponential(3)
    return clip_renormalize(draws / draws.sum(), eps_min)
