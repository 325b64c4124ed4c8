import sys

import pytest

from ftalloc.bridge import ExternalOracle, external_estimate
from ftalloc.cost_model import CircuitProfile
from ftalloc.errors import (
    EstimateValidationError,
    OracleError,
    OracleReportedError,
    OracleUnavailable,
    ProtocolError,
)
from ftalloc.simplex import Allocation, GameConfig, uniform
from ftalloc.solver import solve

ECHO = [sys.executable, "-m", "ftalloc.echo_oracle"]
TOY = CircuitProfile("toy", 1, 1, 0, 0)


def bridge(*flags, timeout=10.0):
    return ExternalOracle(ECHO + [str(f) for f in flags], timeout=timeout)


def test_round_trip():
    with bridge() as b:
        est = external_estimate(uniform(), "adder_8", b)
        assert (est.physical_qubits, est.runtime_seconds) == (1000.0, 1.0)
        assert not b.reentrant
        assert b.descriptor.startswith("exec:")


def test_repeat_request_hits_cache():
    with bridge() as b:
        s = Allocation(0.2, 0.3, 0.5)
        first = b.estimate(s, "x", 0.1)
        assert b.estimate(s, "x", 0.1) is first
        assert b.exchanges == 1
        b.estimate(s, "y", 0.1)
        assert b.exchanges == 2


def test_malformed_line_keeps_raw_text():
    with bridge("--malformed-after", 0) as b:
        with pytest.raises(ProtocolError) as info:
            b.estimate(uniform(), "x", 0.1)
        assert info.value.raw == "this is not json"


def test_invalid_qubit_count():
    with bridge("--Q", 0.5) as b:
        with pytest.raises(EstimateValidationError):
            b.estimate(uniform(), "x", 0.1)


def test_invalid_runtime():
    with bridge("--R", 0) as b:
        with pytest.raises(EstimateValidationError):
            b.estimate(uniform(), "x", 0.1)


def test_error_object():
    with bridge("--error-after", 0) as b:
        with pytest.raises(OracleReportedError, match="refused"):
            b.estimate(uniform(), "x", 0.1)


def test_silent_bridge_times_out():
    silent = [sys.executable, "-c", "import sys, time; print('{\"protocol\": \"ftalloc-oracle/1\"}', flush=True); time.sleep(30)"]
    b = ExternalOracle(silent, timeout=0.5)
    with pytest.raises(OracleUnavailable, match="timed out"):
        b.estimate(uniform(), "x", 0.1)
    with pytest.raises(OracleUnavailable):
        b.estimate(Allocation(0.2, 0.3, 0.5), "x", 0.1)
    b.close()


def test_bad_handshake():
    with pytest.raises(ProtocolError):
        ExternalOracle([sys.executable, "-c", "print('hello')"], timeout=5)
    with pytest.raises(ProtocolError):
        ExternalOracle([sys.executable, "-c", "print('{\"protocol\": \"other/9\"}')"], timeout=5)


def test_missing_executable():
    with pytest.raises(OracleUnavailable):
        ExternalOracle(["/nonexistent/bridge-binary"])


def test_all_errors_are_oracle_errors():
    for cls in (ProtocolError, EstimateValidationError, OracleReportedError, OracleUnavailable):
        assert issubclass(cls, OracleError)


def test_bridge_death_aborts_only_later_restarts():
    cfg1 = GameConfig(restarts=1, scan_points=21, max_sweeps=5)
    with bridge("--bowl", 0.5, 0.3, 0.2) as healthy:
        ref = solve(healthy, TOY, cfg1)
        used = healthy.exchanges

    cfg3 = GameConfig(restarts=3, scan_points=21, max_sweeps=5)
    with bridge("--bowl", 0.5, 0.3, 0.2, "--die-after", used + 5) as dying:
        res = solve(dying, TOY, cfg3)
    assert res.restarts[0] == ref.restarts[0]
    assert res.restarts[0].error is None
    assert set(res.failures) == {2, 3}
    assert all(msg.startswith("OracleUnavailable") for msg in res.failures.values())
    assert res.c_star <= res.uniform_cost
