"""Supervisor side of the analysis sandbox: one fresh subprocess per request."""

from __future__ import annotations

import subprocess
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Mapping

from .protocol import ProtocolError, decode_frame, encode_frame

DEFAULT_TIMEOUT = 30.0
DEFAULT_MEMORY_CAP = 512 * 1024 * 1024
# startup slack added to the script deadline before the subprocess is killed
_KILL_GRACE = 10.0


@dataclass(frozen=True)
class SandboxRequest:
    script: str
    tables: Mapping[str, Any] = field(default_factory=dict)
    profile: tuple[Mapping[str, Any], ...] = ()
    timeout: float = DEFAULT_TIMEOUT
    memory_cap: int = DEFAULT_MEMORY_CAP

    def __post_init__(self) -> None:
        if not 0 < self.timeout <= 120:
            raise ValueError(f"timeout must be in (0, 120], got {self.timeout}")
        if self.memory_cap <= 0:
            raise ValueError("memory_cap must be positive")


@dataclass(frozen=True)
class SandboxResponse:
    status: str  # ok | error | timeout | oom
    result: Any = None
    error: Mapping[str, str] | None = None
    wall_time: float = 0.0
    peak_memory: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class SandboxClient:
    """Runs analysis scripts in isolated one-shot subprocesses."""

    def __init__(self, python: str | None = None):
        self._python = python or sys.executable

    def run_script(self, request: SandboxRequest) -> SandboxResponse:
        payload = {
            "script": request.script,
            "tables": dict(request.tables),
            "profile": [dict(row) for row in request.profile],
            "timeout": request.timeout,
            "memory_cap": request.memory_cap,
        }
        started = time.perf_counter()
        proc = subprocess.Popen(
            [self._python, "-m", "health_agents.sandbox.worker"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
        )
        try:
            stdout, stderr = proc.communicate(
                input=encode_frame(payload), timeout=request.timeout + _KILL_GRACE
            )
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            return SandboxResponse(
                status="timeout",
                error={
                    "message": f"script exceeded {request.timeout}s deadline",
                    "traceback": "",
                },
                wall_time=time.perf_counter() - started,
            )
        wall = time.perf_counter() - started

        if not stdout:
            detail = stderr.decode("utf-8", "replace").strip()
            return SandboxResponse(
                status="error",
                error={
                    "message": (
                        f"sandbox crashed with exit code {proc.returncode}"
                        + (f": {detail[-500:]}" if detail else "")
                    ),
                    "traceback": "",
                },
                wall_time=wall,
            )
        try:
            response, _rest = decode_frame(stdout)
        except (ProtocolError, ValueError) as exc:
            return SandboxResponse(
                status="error",
                error={"message": f"malformed sandbox response: {exc}", "traceback": ""},
                wall_time=wall,
            )
        status = response.get("status", "error")
        return SandboxResponse(
            status=status,
            result=response.get("result") if status == "ok" else None,
            error=response.get("error") if status != "ok" else None,
            wall_time=float(response.get("wall_time") or wall),
            peak_memory=int(response.get("peak_memory") or 0),
        )


def run_script(request: SandboxRequest) -> SandboxResponse:
    return SandboxClient().run_script(request)
