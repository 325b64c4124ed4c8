"""Multistart iterated best response for the three-player allocation game.

All players share one cost, so the game is an exact potential game and every
accepted best response lowers the potential.  Each restart starts from a
Dirichlet(1, 1, 1) draw and sweeps L, T, R until the largest per-player cost
change in a sweep drops under ``tol_delta``.  The uniform split is the initial
incumbent, so the result is never worse than uniform.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .brent import brent_minimize
from .cost_model import CircuitProfile, Oracle, cost, cost_values
from .errors import AllocationError, InfeasibleBudget, OracleError, SolveError
from .simplex import (
    PLAYERS,
    Allocation,
    GameConfig,
    PlayerId,
    deviate,
    deviate_many,
    deviation_interval,
    restart_rng,
    sample_dirichlet_111,
    uniform,
)

log = logging.getLogger(__name__)


class Objective:
    """Shared cost of an allocation under one oracle and profile.

    Infeasible allocations cost ``inf``.  Counts every oracle evaluation.
    """

    def __init__(self, oracle: Oracle, profile: CircuitProfile, cfg: GameConfig):
        self.oracle = oracle
        self.profile = profile
        self.cfg = cfg
        self.evaluations = 0
        self._batched = hasattr(oracle, "estimate_batch")

    def __call__(self, s: Allocation) -> float:
        self.evaluations += 1
        try:
            est = self.oracle.estimate(s, self.profile, self.cfg.epsilon_total)
        except InfeasibleBudget:
            return math.inf
        return cost(est, self.cfg.weight)

    def points(self, rows: np.ndarray) -> np.ndarray:
        """Costs of raw ``(n, 3)`` share rows."""
        rows = np.atleast_2d(rows)
        if self._batched:
            self.evaluations += len(rows)
            q, r = self.oracle.estimate_batch(rows, self.profile, self.cfg.epsilon_total)
            return cost_values(q, r, self.cfg.weight)
        out = np.empty(len(rows))
        for n, row in enumerate(rows):
            try:
                s = Allocation.from_sequence(row, self.cfg.eps_min)
            except AllocationError:
                out[n] = math.inf
                continue
            out[n] = self(s)
        return out

    def line(self, s: Allocation, player: PlayerId, xs) -> np.ndarray:
        return self.points(deviate_many(s, player, np.atleast_1d(xs)))


@dataclass(frozen=True)
class SweepRecord:
    index: int
    allocation: Allocation
    cost: float
    delta: float


@dataclass
class RestartTrace:
    index: int
    start: Allocation
    start_cost: float
    sweeps: list[SweepRecord] = field(default_factory=list)
    converged: bool = False
    error: Optional[str] = None
    evaluations: int = 0

    @property
    def final(self) -> tuple[Allocation, float]:
        if self.sweeps:
            return self.sweeps[-1].allocation, self.sweeps[-1].cost
        return self.start, self.start_cost

    def costs(self) -> list[float]:
        return [self.start_cost] + [rec.cost for rec in self.sweeps]


@dataclass
class SolveResult:
    s_star: Allocation
    c_star: float
    uniform_cost: float
    restarts: list[RestartTrace]
    winning_restart: Optional[int]
    evaluations: int

    @property
    def converged(self) -> list[bool]:
        return [tr.converged for tr in self.restarts]

    @property
    def all_converged(self) -> bool:
        return all(tr.converged for tr in self.restarts if tr.error is None)

    @property
    def failures(self) -> dict[int, str]:
        return {tr.index: tr.error for tr in self.restarts if tr.error is not None}

    @property
    def sweeps(self) -> int:
        """Sweeps run by the winning restart (0 when uniform was kept)."""
        if self.winning_restart is None:
            return 0
        return len(self.restarts[self.winning_restart - 1].sweeps)


def best_response(
    oracle: Oracle,
    s: Allocation,
    player: PlayerId,
    cfg: GameConfig,
    profile: Optional[CircuitProfile] = None,
    current_cost: Optional[float] = None,
    objective: Optional[Objective] = None,
) -> tuple[Allocation, float]:
    """Player's cost-minimizing share with the opponents' ratio held fixed.

    With ``cfg.scan_points > 0`` the feasible interval is first scanned on an
    even grid and Brent refines the cell pair around the best grid point;
    stepwise oracles otherwise trap Brent on a plateau.  The current share is
    always a candidate, so the returned cost never exceeds the input cost.
    """
    obj = objective or Objective(oracle, profile, cfg)
    c0 = obj(s) if current_cost is None else current_cost
    lo, hi = deviation_interval(s, player)
    if not hi > lo:
        return s, c0

    candidates = []
    a, b = lo, hi
    if cfg.scan_points:
        xs = np.linspace(lo, hi, cfg.scan_points)
        cs = obj.line(s, player, xs)
        j = int(np.argmin(cs))
        candidates.append((float(cs[j]), float(xs[j])))
        a, b = float(xs[max(j - 1, 0)]), float(xs[min(j + 1, len(xs) - 1)])
    res = brent_minimize(lambda x: float(obj.line(s, player, x)[0]), a, b, cfg.xtol, cfg.max_eval)
    candidates.append((res.f_star, res.x_star))

    c_new, x_new = min(candidates)
    if not c_new < c0:
        return s, c0
    return deviate(s, player, x_new), c_new


def sweep(
    oracle: Oracle,
    s: Allocation,
    cfg: GameConfig,
    profile: Optional[CircuitProfile] = None,
    current_cost: Optional[float] = None,
    objective: Optional[Objective] = None,
) -> tuple[Allocation, float, float]:
    """One cyclic pass L, T, R.  Returns ``(allocation, delta, cost)``."""
    obj = objective or Objective(oracle, profile, cfg)
    c = obj(s) if current_cost is None else current_cost
    delta = 0.0
    for player in PLAYERS:
        s, c_new = best_response(oracle, s, player, cfg, current_cost=c, objective=obj)
        delta = max(delta, _change(c, c_new, cfg.relative_delta))
        c = c_new
    return s, delta, c


def _change(old: float, new: float, relative: bool) -> float:
    if old == new:
        return 0.0
    diff = abs(new - old)
    if relative and math.isfinite(old) and old != 0:
        return diff / abs(old)
    return diff


def _run_restart(oracle: Oracle, profile: CircuitProfile, cfg: GameConfig, k: int) -> RestartTrace:
    obj = Objective(oracle, profile, cfg)
    s = sample_dirichlet_111(restart_rng(cfg.rng_seed, k), cfg.eps_min)
    trace = RestartTrace(index=k, start=s, start_cost=math.nan)
    try:
        c = trace.start_cost = obj(s)
        for t in range(1, cfg.max_sweeps + 1):
            s, delta, c = sweep(oracle, s, cfg, current_cost=c, objective=obj)
            trace.sweeps.append(SweepRecord(t, s, c, delta))
            if delta < cfg.tol_delta:
                trace.converged = True
                break
    except OracleError as exc:
        log.warning("restart %d of %s aborted: %s", k, profile.name, exc)
        trace.error = f"{type(exc).__name__}: {exc}"
    trace.evaluations = obj.evaluations
    return trace


def solve(oracle: Oracle, profile: CircuitProfile, cfg: GameConfig, workers: int = 1) -> SolveResult:
    """Equilibrium allocation for one circuit.

    Restarts run concurrently only when ``workers > 1`` and the oracle is
    reentrant; the merge is by restart index either way, so the result does
    not depend on scheduling.
    """
    obj = Objective(oracle, profile, cfg)
    s_star = uniform(cfg.eps_min)
    try:
        c_star = c_uniform = obj(s_star)
    except OracleError as exc:
        raise SolveError(f"oracle failed at the uniform allocation: {exc}") from exc

    ks = range(1, cfg.restarts + 1)
    if workers > 1 and getattr(oracle, "reentrant", False):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(lambda k: _run_restart(oracle, profile, cfg, k), ks))
    else:
        traces = [_run_restart(oracle, profile, cfg, k) for k in ks]

    failed = [tr for tr in traces if tr.error is not None]
    if len(failed) == len(traces):
        raise SolveError(f"all {len(traces)} restarts failed; first: {failed[0].error}")

    winner = None
    for tr in traces:
        if tr.error is not None:
            continue
        s_k, c_k = tr.final
        if c_k < c_star:
            s_star, c_star, winner = s_k, c_k, tr.index
    evaluations = obj.evaluations + sum(tr.evaluations for tr in traces)
    return SolveResult(s_star, c_star, c_uniform, traces, winner, evaluations)
