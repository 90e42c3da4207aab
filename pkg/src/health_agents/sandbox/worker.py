"""Sandbox subprocess entry point: one request frame in, one response out.

Runs the submitted script's analysis(...) entry point against the four
deserialized dataframes with networking disabled, a memory cap, and a
scratch working directory. Never raises to the caller; every failure is a
structured error response.
"""

from __future__ import annotations

import os
import sys
import tempfile
import time
import traceback
from typing import Any


def _disable_network() -> None:
    import socket

    def _refuse(*_args: Any, **_kwargs: Any):
        raise RuntimeError("network access is disabled in the sandbox")

    socket.socket = _refuse  # type: ignore[misc, assignment]
    socket.create_connection = _refuse  # type: ignore[assignment]
    socket.getaddrinfo = _refuse  # type: ignore[assignment]
    socket.gethostbyname = _refuse  # type: ignore[assignment]


def _apply_memory_cap(cap_bytes: int) -> None:
    try:
        import resource

        soft, hard = resource.getrlimit(resource.RLIMIT_AS)
        resource.setrlimit(resource.RLIMIT_AS, (cap_bytes, hard))
    except (ImportError, ValueError, OSError):
        pass


def _peak_memory_bytes() -> int:
    try:
        import resource

        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    except (ImportError, OSError):
        return 0


def _sanitize(value: Any) -> Any:
    """Make analysis return values JSON-frameable."""
    import numpy as np
    import pandas as pd

    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (pd.Timestamp,)):
        return value.isoformat()
    if isinstance(value, dict):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, np.ndarray)):
        return [_sanitize(v) for v in value]
    if isinstance(value, pd.Series):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, pd.DataFrame):
        return _sanitize(value.to_dict(orient="list"))
    return repr(value)


def _run(request: dict) -> dict:
    import pandas as pd

    from health_agents.data_model import load_tables, tables_to_frames

    script = request.get("script", "")
    tables = load_tables(request.get("tables") or {})
    frames = tables_to_frames(tables)
    profile_rows = request.get("profile") or []
    frames["profile_df"] = pd.DataFrame(
        profile_rows, columns=["field", "value", "unit"]
    )

    import numpy as np

    namespace: dict[str, Any] = {"pd": pd, "np": np}
    exec(compile(script, "<analysis>", "exec"), namespace)
    analysis = namespace.get("analysis")
    if not callable(analysis):
        raise ValueError("script does not define an analysis(...) function")
    result = analysis(
        frames["summary_df"],
        frames["activities_df"],
        frames["profile_df"],
        frames["population_df"],
    )
    return _sanitize(result)


def main() -> int:
    from .protocol import read_frame, write_frame

    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer
    request = read_frame(stdin)
    if request is None:
        return 0

    scratch = tempfile.mkdtemp(prefix="sandbox-")
    os.chdir(scratch)
    _disable_network()
    cap = int(request.get("memory_cap") or 0)
    if cap > 0:
        _apply_memory_cap(cap)

    started = time.perf_counter()
    response: dict[str, Any]
    try:
        result = _run(request)
        response = {
            "status": "ok",
            "result": result,
            "error": None,
        }
    except MemoryError:
        response = {
            "status": "oom",
            "result": None,
            "error": {"message": "memory cap exceeded", "traceback": ""},
        }
    except BaseException as exc:  # report, never crash the frame
        response = {
            "status": "error",
            "result": None,
            "error": {
                "message": f"{type(exc).__name__}: {exc}",
                "traceback": traceback.format_exc(),
            },
        }
    response["wall_time"] = time.perf_counter() - started
    response["peak_memory"] = _peak_memory_bytes()
    write_frame(stdout, response)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
