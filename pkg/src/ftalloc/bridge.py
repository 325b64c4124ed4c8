"""Delegate resource estimation to an external process.

The bridge speaks newline-delimited JSON on its stdin/stdout::

    <- {"protocol": "ftalloc-oracle/1", "reentrant": false}     (once, at startup)
    -> {"profile": "adder_8", "s": [0.2, 0.3, 0.5], "epsilon_total": 0.1}
    <- {"Q": 12345, "R_seconds": 0.42}    or    {"error": "..."}
"""
from __future__ import annotations

import json
import logging
import math
import queue
import shlex
import subprocess
import threading
from typing import Optional, Sequence, Union

from .cost_model import CircuitProfile, ResourceEstimate
from .errors import (
    EstimateValidationError,
    OracleReportedError,
    OracleUnavailable,
    ProtocolError,
)
from .simplex import Allocation

log = logging.getLogger(__name__)

PROTOCOL = "ftalloc-oracle/1"
CACHE_DECIMALS = 9
_EOF = object()


class ExternalOracle:
    """Oracle backed by a long-running bridge process.

    Wire exchanges are serialized through one lock.  Responses are cached by
    profile name and the allocation rounded to nine decimals.
    """

    def __init__(self, command: Union[str, Sequence[str]], timeout: float = 60.0):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self.exchanges = 0
        self._cache: dict[tuple, ResourceEstimate] = {}
        self._lock = threading.Lock()
        self._lines: "queue.Queue[object]" = queue.Queue()
        self._proc: Optional[subprocess.Popen] = None
        self._dead: Optional[str] = None
        self.reentrant = False
        self._start()

    @property
    def descriptor(self) -> str:
        return "exec:" + shlex.join(self.argv)

    def _start(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise OracleUnavailable(f"cannot start bridge {self.argv!r}: {exc}") from exc
        threading.Thread(target=self._pump, daemon=True).start()
        line = self._read_line()
        try:
            hello = json.loads(line)
        except json.JSONDecodeError:
            self.close()
            raise ProtocolError("bad handshake", line) from None
        if not isinstance(hello, dict) or hello.get("protocol") != PROTOCOL:
            self.close()
            raise ProtocolError("unsupported handshake", line)
        self.reentrant = bool(hello.get("reentrant", False))

    def _pump(self) -> None:
        assert self._proc is not None and self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def _read_line(self) -> str:
        if self._dead:
            raise OracleUnavailable(self._dead)
        try:
            item = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self._dead = f"bridge timed out after {self.timeout} s"
            self.close()
            raise OracleUnavailable(self._dead) from None
        if item is _EOF:
            code = self._proc.poll() if self._proc else None
            self._dead = f"bridge closed its output (exit status {code})"
            raise OracleUnavailable(self._dead)
        return str(item)

    def _exchange(self, request: dict) -> str:
        assert self._proc is not None and self._proc.stdin is not None
        if self._dead:
            raise OracleUnavailable(self._dead)
        try:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            self._dead = f"bridge input closed: {exc}"
            raise OracleUnavailable(self._dead) from exc
        self.exchanges += 1
        return self._read_line()

    def estimate(self, s: Allocation, profile: Union[CircuitProfile, str], epsilon_total: float) -> ResourceEstimate:
        name = profile if isinstance(profile, str) else profile.name
        shares = [round(v, CACHE_DECIMALS) for v in s.as_tuple()]
        key = (name, *shares, epsilon_total)
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                return hit
            line = self._exchange({"profile": name, "s": list(s.as_tuple()), "epsilon_total": epsilon_total})
            est = _parse_response(line)
            self._cache[key] = est
            return est

    def close(self) -> None:
        proc = self._proc
        if proc is None or (proc.stdin is not None and proc.stdin.closed):
            return
        try:
            if proc.stdin:
                proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
        self._dead = self._dead or "bridge closed"

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _parse_response(line: str) -> ResourceEstimate:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError:
        raise ProtocolError("malformed response", line.rstrip("\n")) from None
    if not isinstance(msg, dict):
        raise ProtocolError("response is not an object", line.rstrip("\n"))
    if "error" in msg:
        raise OracleReportedError(str(msg["error"]))
    try:
        q = float(msg["Q"])
        r = float(msg["R_seconds"])
    except (KeyError, TypeError, ValueError):
        raise ProtocolError("response lacks numeric Q/R_seconds", line.rstrip("\n")) from None
    if not (math.isfinite(q) and q >= 1):
        raise EstimateValidationError(f"bridge returned Q={q!r} (< 1)")
    if not (math.isfinite(r) and r > 0):
        raise EstimateValidationError(f"bridge returned R_seconds={r!r} (<= 0)")
    return ResourceEstimate(q, r)


def external_estimate(s: Allocation, profile_name: str, bridge: ExternalOracle, epsilon_total: float = 0.1):
    return bridge.estimate(s, profile_name, epsilon_total)
