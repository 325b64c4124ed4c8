"""Brute-force checks that do not share the solver's search path.

``grid_minimize`` enumerates the simplex on a lattice, ``certify_nash`` probes
every unilateral deviation on an even grid, and ``improvement`` reports the
space-time volume gain over the uniform split.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost_model import CircuitProfile, Oracle, ResourceEstimate, space_time_volume
from .errors import InfeasibleBudget
from .simplex import PLAYERS, Allocation, GameConfig, deviate, deviation_interval, uniform
from .solver import Objective, SolveResult

GRID_CHUNK = 200_000


@dataclass(frozen=True)
class EquilibriumCertificate:
    allocation: Allocation
    improvements: tuple[float, float, float]
    samples_per_player: int
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "allocation": list(self.allocation.as_tuple()),
            "improvements": list(self.improvements),
            "samples_per_player": self.samples_per_player,
            "bound": self.bound,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ImprovementReport:
    name: str
    uniform: Allocation
    equilibrium: Allocation
    uniform_estimate: ResourceEstimate
    equilibrium_estimate: ResourceEstimate
    volume_uniform: float
    volume_equilibrium: float
    improvement_pct: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "uniform": {
                "s": list(self.uniform.as_tuple()),
                "Q": self.uniform_estimate.physical_qubits,
                "R_seconds": self.uniform_estimate.runtime_seconds,
                "volume": self.volume_uniform,
            },
            "equilibrium": {
                "s": list(self.equilibrium.as_tuple()),
                "Q": self.equilibrium_estimate.physical_qubits,
                "R_seconds": self.equilibrium_estimate.runtime_seconds,
                "volume": self.volume_equilibrium,
            },
            "improvement_pct": self.improvement_pct,
        }


def simplex_grid(resolution: float, eps_min: float) -> np.ndarray:
    """Feasible lattice points ``(a h, b h, 1 - a h - b h)`` in (s_L, s_T) order."""
    if not 0.0 < resolution <= 0.1:
        raise ValueError(f"resolution must lie in (0, 0.1], got {resolution}")
    n = int(math.floor(1.0 / resolution + 1e-9))
    a, b = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    s_l = a.ravel() * resolution
    s_t = b.ravel() * resolution
    s_r = 1.0 - s_l - s_t
    pts = np.column_stack([s_l, s_t, s_r])
    keep = (pts >= eps_min).all(axis=1)
    return pts[keep]


def grid_minimize(
    oracle: Oracle, profile: CircuitProfile, cfg: GameConfig, resolution: float = 0.002
) -> tuple[Allocation, float]:
    """Cheapest lattice point; ties go to the lexicographically smallest (s_L, s_T)."""
    pts = simplex_grid(resolution, cfg.eps_min)
    obj = Objective(oracle, profile, cfg)
    best_i, best_c = -1, math.inf
    for start in range(0, len(pts), GRID_CHUNK):
        costs = obj.points(pts[start : start + GRID_CHUNK])
        j = int(np.argmin(costs))
        if costs[j] < best_c or best_i < 0:
            best_i, best_c = start + j, float(costs[j])
    return Allocation.from_sequence(pts[best_i], cfg.eps_min), best_c


def certify_nash(
    oracle: Oracle,
    profile: CircuitProfile,
    s: Allocation,
    cfg: GameConfig,
    samples_per_player: int = 2001,
    bound: float | None = None,
) -> EquilibriumCertificate:
    """Largest cost drop any single player finds on an even deviation grid."""
    if samples_per_player < 3:
        raise ValueError("need at least 3 samples per player")
    bound = 10.0 * cfg.tol_delta if bound is None else bound
    obj = Objective(oracle, profile, cfg)
    base = obj(s)
    gains = []
    for player in PLAYERS:
        lo, hi = deviation_interval(s, player)
        best = base
        for x in np.linspace(lo, hi, samples_per_player):
            best = min(best, obj(deviate(s, player, float(x))))
        gains.append(base - best if best < base else 0.0)
    return EquilibriumCertificate(
        s, tuple(gains), samples_per_player, bound, all(g <= bound for g in gains)
    )


def pareto_dominators(
    oracle: Oracle, profile: CircuitProfile, cfg: GameConfig, s: Allocation, resolution: float = 0.002
) -> np.ndarray:
    """Lattice points with Q and R both no worse than at ``s`` and one strictly better."""
    est = oracle.estimate(s, profile, cfg.epsilon_total)
    pts = simplex_grid(resolution, cfg.eps_min)
    if hasattr(oracle, "estimate_batch"):
        q, r = oracle.estimate_batch(pts, profile, cfg.epsilon_total)
    else:
        q, r = np.full(len(pts), math.inf), np.full(len(pts), math.inf)
        for n, row in enumerate(pts):
            try:
                e = oracle.estimate(Allocation.from_sequence(row, cfg.eps_min), profile, cfg.epsilon_total)
            except InfeasibleBudget:
                continue
            q[n], r[n] = e.physical_qubits, e.runtime_seconds
    qs, rs = est.physical_qubits, est.runtime_seconds
    dom = (q <= qs) & (r <= rs) & ((q < qs) | (r < rs))
    return pts[dom]


def improvement(
    oracle: Oracle, profile: CircuitProfile, cfg: GameConfig, result: SolveResult
) -> ImprovementReport:
    u = uniform(cfg.eps_min)
    est_u = oracle.estimate(u, profile, cfg.epsilon_total)
    est_e = oracle.estimate(result.s_star, profile, cfg.epsilon_total)
    v_u, v_e = space_time_volume(est_u), space_time_volume(est_e)
    return ImprovementReport(
        profile.name, u, result.s_star, est_u, est_e, v_u, v_e, improvement_pct(v_u, v_e)
    )


def improvement_pct(volume_uniform: float, volume_equilibrium: float) -> float:
    return 100.0 * (1.0 - volume_equilibrium / volume_uniform)
