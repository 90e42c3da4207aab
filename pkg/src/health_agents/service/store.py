"""Durable session records: one JSON file per session, written with a
write-then-rename so a failed write never corrupts the previous record."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from ..orchestrator import MemoryStore, SessionTrace


@dataclass(frozen=True)
class SessionDescriptor:
    session_id: str
    mode: str
    persona_id: str
    created_at: str
    status: str  # open | ended

    def __post_init__(self) -> None:
        if self.status not in ("open", "ended"):
            raise ValueError(f"bad session status {self.status!r}")

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "mode": self.mode,
            "persona_id": self.persona_id,
            "created_at": self.created_at,
            "status": self.status,
        }


@dataclass(frozen=True)
class SessionRecord:
    descriptor: SessionDescriptor
    conversation: tuple[tuple[str, str], ...]
    memory_rows: tuple[dict, ...]
    next_turn_id: int
    trace: dict

    def to_dict(self) -> dict:
        return {
            "descriptor": self.descriptor.to_dict(),
            "conversation": [list(pair) for pair in self.conversation],
            "memory": list(self.memory_rows),
            "next_turn_id": self.next_turn_id,
            "trace": self.trace,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SessionRecord":
        raw = payload["descriptor"]
        descriptor = SessionDescriptor(
            session_id=str(raw["session_id"]),
            mode=str(raw["mode"]),
            persona_id=str(raw.get("persona_id", "")),
            created_at=str(raw.get("created_at", "")),
            status=str(raw.get("status", "open")),
        )
        return cls(
            descriptor=descriptor,
            conversation=tuple(
                (str(role), str(text)) for role, text in payload.get("conversation", [])
            ),
            memory_rows=tuple(dict(row) for row in payload.get("memory", [])),
            next_turn_id=int(payload.get("next_turn_id", 1)),
            trace=dict(payload.get("trace", {})),
        )

    def restore_memory(self) -> MemoryStore:
        return MemoryStore.from_rows(list(self.memory_rows))

    def restore_trace(self) -> SessionTrace:
        return SessionTrace.from_dict(self.trace)


class SessionStore:
    """Directory of {session_id}.json records."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        if not session_id or "/" in session_id or session_id.startswith("."):
            raise ValueError(f"unusable session id {session_id!r}")
        return self.root / f"{session_id}.json"

    def save(self, record: SessionRecord) -> None:
        """Atomic: the previous record survives any mid-write failure."""
        path = self._path(record.descriptor.session_id)
        temp = path.with_suffix(".json.tmp")
        payload = json.dumps(record.to_dict(), ensure_ascii=False, indent=1)
        with open(temp, "w", encoding="utf-8") as handle:
            handle.write(payload)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(temp, path)

    def load(self, session_id: str) -> SessionRecord | None:
        path = self._path(session_id)
        if not path.exists():
            return None
        return SessionRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def list_ids(self) -> tuple[str, ...]:
        return tuple(
            sorted(path.stem for path in self.root.glob("*.json"))
        )

    def load_all(self) -> tuple[SessionRecord, ...]:
        return tuple(
            record
            for record in (self.load(session_id) for session_id in self.list_ids())
            if record is not None
        )
