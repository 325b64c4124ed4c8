import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftalloc.cost_model import (
    CircuitProfile,
    ResourceEstimate,
    SurfaceCodeModel,
    SyntheticOracle,
    code_distance,
    cost,
    cost_values,
    distillation_levels,
    estimate,
    load_profile,
    partition,
    rotation_t_cost,
    space_time_volume,
)
from ftalloc.errors import InfeasibleBudget
from ftalloc.simplex import Allocation, PlayerId, GameConfig, clip_renormalize, deviate, deviation_interval, uniform

CFG = GameConfig()


def reference_estimate(s, n, depth, t, rot, p=1e-3, pth=1e-2, cycle_us=1.0, eps_total=0.1):
    """Straight-line surrogate, written independently of the package."""
    e_l, e_t, e_r = (x * eps_total for x in s)
    m = math.ceil(1 + 3 * math.log2(1 / (e_r / max(rot, 1))))
    total_t = t + rot * m
    d = 3
    while not 0.1 * (p / pth) ** ((d + 1) // 2) <= e_l / (n * depth) * (1 + 1e-12):
        d += 2
    if t + rot == 0:
        lvl, factory = 0, 0
    else:
        lvl = 1
        while not (35 * p) ** (2**lvl) / 35 <= e_t / max(total_t, 1) * (1 + 1e-12):
            lvl += 1
        factory = lvl * 15 * 2 * d * d
    q = n * 2 * d * d + factory
    r = max(depth * d, total_t * lvl * d) * cycle_us * 1e-6
    return q, r


def test_partition():
    u = partition(uniform(), 0.1)
    assert u.eps_logical == u.eps_tstates == u.eps_rotations == pytest.approx(0.1 / 3, abs=1e-17)
    p = partition(Allocation(0.5, 0.25, 0.25), 0.1)
    assert (p.eps_logical, p.eps_tstates, p.eps_rotations) == pytest.approx((0.05, 0.025, 0.025))


@given(st.tuples(*[st.floats(0.01, 1.0)] * 3))
def test_partition_sums_to_budget(raw):
    p = partition(clip_renormalize(raw), 0.1)
    assert abs(p.eps_logical + p.eps_tstates + p.eps_rotations - 0.1) <= 1e-12


def test_code_distance_examples():
    boundary = 0.1 * (1e-3 / 1e-2) ** 2
    assert code_distance(boundary, 1e-3, 1e-2) == 3
    # inequality oracle evaluated with exact decimal thresholds 0.1 * 10**-k
    oracle_d = next(d for d in range(3, 100, 2) if (d + 1) // 2 >= 9)
    assert oracle_d == 17
    assert code_distance(1e-10, 1e-3, 1e-2) == 17


def test_code_distance_monotone():
    target = 0.05
    prev = code_distance(target)
    for _ in range(60):
        target /= 2
        d = code_distance(target)
        assert d >= prev and d % 2 == 1
        prev = d


def test_code_distance_overflow():
    with pytest.raises(InfeasibleBudget, match="distance overflow"):
        code_distance(1e-60)


def test_rotation_t_cost():
    assert rotation_t_cost(0.5) == 4
    # any target below 1 leaves a positive log term, so the ceiling is 2
    assert rotation_t_cost(1 - 1e-12) == 2
    assert rotation_t_cost(math.nextafter(1.0, 0.0)) == 2
    with pytest.raises(ValueError):
        rotation_t_cost(1.0)
    costs = [rotation_t_cost(10.0**-k) for k in range(1, 15)]
    assert costs == sorted(costs)


def test_distillation_levels():
    assert distillation_levels(1e-4) == 1
    assert distillation_levels(1e-6) == 2
    assert distillation_levels(1e-12) == 3
    with pytest.raises(InfeasibleBudget, match="distillation overflow"):
        distillation_levels(1e-30)


def test_no_magic_states_means_no_factory():
    prof = CircuitProfile("clifford", n_qubits=5, depth=40, t_count=0, rotation_count=0)
    est = estimate(uniform(), prof, CFG)
    d = code_distance(0.1 / 3 / (5 * 40))
    assert est.physical_qubits == 5 * 2 * d * d
    assert est.runtime_seconds == pytest.approx(40 * d * 1e-6, rel=1e-15)


def test_reference_profile_golden(reference_profile):
    est = estimate(uniform(), reference_profile, CFG)
    assert reference_estimate(uniform().as_tuple(), 10, 100, 50, 20) == (2450, 0.00441)
    # d = 7, 29 T per rotation, 630 T total, one distillation level
    assert (est.physical_qubits, est.runtime_seconds) == (2450.0, 0.00441)


@settings(max_examples=200, deadline=None)
@given(
    st.tuples(*[st.floats(0.01, 1.0)] * 3),
    st.integers(1, 60),
    st.integers(1, 2000),
    st.integers(0, 5000),
    st.integers(0, 800),
)
def test_matches_straight_line_reference(raw, n, depth, t, rot):
    s = clip_renormalize(raw)
    prof = CircuitProfile("h", n, depth, t, rot)
    est = estimate(s, prof, CFG)
    q, r = reference_estimate(s.as_tuple(), n, depth, t, rot)
    assert est.physical_qubits == q
    assert est.runtime_seconds == pytest.approx(r, rel=1e-15)


def test_batch_is_bit_identical(corpus):
    oracle = SyntheticOracle()
    rng = np.random.default_rng(3)
    pts = np.array([clip_renormalize(rng.dirichlet([1, 1, 1])).as_tuple() for _ in range(300)])
    for prof in corpus:
        q, r = oracle.estimate_batch(pts, prof, 0.1)
        for row, qi, ri in zip(pts, q, r):
            est = oracle.estimate(Allocation.from_sequence(row), prof, 0.1)
            assert (est.physical_qubits, est.runtime_seconds) == (qi, ri)


def test_deterministic(reference_profile):
    s = Allocation(0.2, 0.3, 0.5)
    assert estimate(s, reference_profile, CFG) == estimate(s, reference_profile, CFG)


@settings(max_examples=100, deadline=None)
@given(st.tuples(*[st.floats(0.02, 1.0)] * 3), st.sampled_from([PlayerId.L, PlayerId.R]), st.integers(0, 19))
def test_budget_pressure_is_monotone(corpus, raw, player, which):
    """A larger own share never worsens the quantity that share controls.

    Q and R themselves are not monotone along a deviation line: the opponents
    shrink too, and the R budget feeds the T count.
    """
    prof = corpus[which]
    s = clip_renormalize(raw)
    lo, hi = deviation_interval(s, player)
    shares = [partition(deviate(s, player, float(x)), 0.1) for x in np.linspace(lo, hi, 40)]
    if player == PlayerId.L:
        ds = [code_distance(e.eps_logical / (prof.n_qubits * prof.depth)) for e in shares]
        assert all(a >= b for a, b in zip(ds, ds[1:]))
    else:
        ms = [rotation_t_cost(e.eps_rotations / max(prof.rotation_count, 1)) for e in shares]
        assert all(a >= b for a, b in zip(ms, ms[1:]))


def test_levels_monotone_in_tstate_budget():
    targets = np.geomspace(1e-3, 1e-24, 200)
    levels = [distillation_levels(float(t)) for t in targets]
    assert all(a <= b for a, b in zip(levels, levels[1:]))


def test_cost_examples():
    assert cost(ResourceEstimate(100, 100), 0.5) == 100
    assert cost(ResourceEstimate(4, 9), 0.5) == 6
    assert space_time_volume(ResourceEstimate(4, 9)) == 36
    with pytest.raises(ValueError):
        cost(ResourceEstimate(4, 9), 1.0)


@given(st.floats(1, 1e9), st.floats(1e-9, 1e6), st.floats(0.01, 0.99), st.floats(1.001, 3))
def test_cost_strictly_increasing(q, r, w, k):
    base = cost(ResourceEstimate(q, r), w)
    assert cost(ResourceEstimate(q * k, r), w) > base
    assert cost(ResourceEstimate(q, r * k), w) > base


def test_cost_values_matches_scalar():
    rng = np.random.default_rng(0)
    q, r = rng.uniform(1, 1e6, 500), rng.uniform(1e-6, 10, 500)
    vec = cost_values(q, r, 0.37)
    assert all(v == cost(ResourceEstimate(a, b), 0.37) for v, a, b in zip(vec, q, r))


def test_estimate_validation():
    with pytest.raises(ValueError):
        ResourceEstimate(0.5, 1.0)
    with pytest.raises(ValueError):
        ResourceEstimate(10, 0.0)


def test_profile_loading(tmp_path):
    good = {"name": "x", "n_qubits": 3, "depth": 4, "t_count": 1, "rotation_count": 2}
    path = tmp_path / "x.json"
    path.write_text(json.dumps(good))
    assert load_profile(path) == CircuitProfile("x", 3, 4, 1, 2)
    path.write_text(json.dumps({**good, "t_cuont": 3}))
    with pytest.raises(ValueError, match="unknown profile fields"):
        load_profile(path)
    path.write_text(json.dumps({**good, "p_phys": 0.02}))
    with pytest.raises(ValueError):
        load_profile(path)
    path.write_text(json.dumps({**good, "depth": 4.5}))
    with pytest.raises(ValueError):
        load_profile(path)


def test_model_constants_configurable(reference_profile):
    loose = SyntheticOracle(SurfaceCodeModel(prefactor=0.01))
    tight = SyntheticOracle()
    s = uniform()
    assert loose.estimate(s, reference_profile, 0.1).physical_qubits <= tight.estimate(s, reference_profile, 0.1).physical_qubits
