"""Length-prefixed JSON wire protocol shared by sandbox client and worker.

Frame layout (both directions): 4-byte big-endian payload length, then that
many bytes of UTF-8 JSON.
"""

from __future__ import annotations

import json
import struct
from typing import Any, BinaryIO

_HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 64 * 1024 * 1024


class ProtocolError(Exception):
    pass


def encode_frame(payload: Any) -> bytes:
    body = json.dumps(payload, ensure_ascii=False, allow_nan=True).encode("utf-8")
    if len(body) > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame of {len(body)} bytes exceeds limit")
    return _HEADER.pack(len(body)) + body


def decode_frame(data: bytes) -> tuple[Any, bytes]:
    """Decode one frame from the head of data; returns (payload, rest)."""
    if len(data) < _HEADER.size:
        raise ProtocolError("truncated frame header")
    (length,) = _HEADER.unpack(data[: _HEADER.size])
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"declared frame of {length} bytes exceeds limit")
    end = _HEADER.size + length
    if len(data) < end:
        raise ProtocolError("truncated frame body")
    payload = json.loads(data[_HEADER.size : end].decode("utf-8"))
    return payload, data[end:]


def write_frame(stream: BinaryIO, payload: Any) -> None:
    stream.write(encode_frame(payload))
    stream.flush()


def read_frame(stream: BinaryIO) -> Any | None:
    """Read one frame; None on clean EOF before a header byte."""
    header = stream.read(_HEADER.size)
    if not header:
        return None
    if len(header) < _HEADER.size:
        raise ProtocolError("truncated frame header")
    (length,) = _HEADER.unpack(header)
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"declared frame of {length} bytes exceeds limit")
    body = b""
    while len(body) < length:
        chunk = stream.read(length - len(body))
        if not chunk:
            raise ProtocolError("truncated frame body")
        body += chunk
    return json.loads(body.decode("utf-8"))
