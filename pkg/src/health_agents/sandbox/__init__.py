"""Isolated subprocess execution of generated analysis scripts."""

from .client import (
    DEFAULT_MEMORY_CAP,
    DEFAULT_TIMEOUT,
    SandboxClient,
    SandboxRequest,
    SandboxResponse,
    run_script,
)
from .protocol import (
    MAX_FRAME_BYTES,
    ProtocolError,
    decode_frame,
    encode_frame,
    read_frame,
    write_frame,
)

__all__ = [
    "DEFAULT_MEMORY_CAP",
    "DEFAULT_TIMEOUT",
    "MAX_FRAME_BYTES",
    "ProtocolError",
    "SandboxClient",
    "SandboxRequest",
    "SandboxResponse",
    "decode_frame",
    "encode_frame",
    "read_frame",
    "run_script",
    "write_frame",
]
