"""Per-session long-term memory: append-only typed entries extracted
after each turn and injected into later main-agent prompts."""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..gateway import CompletionRequest, Gateway
from .routing import strip_json_fences

EXTRACT_TEMPLATE = "memory-extract"
MEMORY_KINDS = ("goal", "barrier", "preference", "insight", "plan")
VISIBLE_KINDS = ("goal", "barrier", "preference")


@dataclass(frozen=True)
class MemoryEntry:
    turn_id: int
    kind: str
    agent_source: str
    text: str

    def __post_init__(self) -> None:
        if self.kind not in MEMORY_KINDS:
            raise ValueError(f"bad memory kind {self.kind!r}")
        if not self.text.strip():
            raise ValueError("memory entry text is empty")


class MemoryStore:
    """Append-only; entries are never mutated or removed."""

    def __init__(self) -> None:
        self._entries: list[MemoryEntry] = []

    def append(self, entry: MemoryEntry) -> MemoryEntry:
        self._entries.append(entry)
        return entry

    def entries(self, kind: str | None = None) -> tuple[MemoryEntry, ...]:
        if kind is None:
            return tuple(self._entries)
        if kind not in MEMORY_KINDS:
            raise ValueError(f"bad memory kind {kind!r}")
        return tuple(entry for entry in self._entries if entry.kind == kind)

    def __len__(self) -> int:
        return len(self._entries)

    def visible_block(
        self,
        before_turn: int,
        kinds: tuple[str, ...] = VISIBLE_KINDS,
    ) -> str:
        """Rendered memory lines for prompt injection: all entries of the
        given kinds from turns strictly before before_turn."""
        lines = [
            f"- [{entry.kind}] {entry.text}"
            for entry in self._entries
            if entry.turn_id < before_turn and entry.kind in kinds
        ]
        if not lines:
            return ""
        return "Known about the user from earlier in this conversation:\n" + (
            "\n".join(lines)
        )

    def to_rows(self) -> list[dict]:
        return [
            {
                "turn_id": entry.turn_id,
                "kind": entry.kind,
                "agent_source": entry.agent_source,
                "text": entry.text,
            }
            for entry in self._entries
        ]

    @classmethod
    def from_rows(cls, rows: list[dict]) -> "MemoryStore":
        store = cls()
        for row in rows:
            store.append(
                MemoryEntry(
                    turn_id=int(row["turn_id"]),
                    kind=str(row["kind"]),
                    agent_source=str(row.get("agent_source", "")),
                    text=str(row["text"]),
                )
            )
        return store


def extract_memory(
    gateway: Gateway,
    store: MemoryStore,
    *,
    turn_id: int,
    conversation: str,
    user_message: str,
    reply: str,
    session_id: str = "",
) -> tuple[tuple[MemoryEntry, ...], bool]:
    """Extract and append new entries for this turn.  Returns (appended,
    flagged); extraction failure appends nothing and flags the turn."""
    response = gateway.complete(
        CompletionRequest(
            template_id=EXTRACT_TEMPLATE,
            variables={
                "conversation": conversation,
                "user_message": user_message,
                "reply": reply,
            },
            agent_tag="orchestrator",
            session_id=session_id,
        )
    )
    try:
        payload = json.loads(strip_json_fences(response))
    except ValueError:
        return (), True
    if not isinstance(payload, list):
        return (), True
    appended: list[MemoryEntry] = []
    for item in payload:
        if not isinstance(item, dict):
            continue
        kind = item.get("kind")
        content = item.get("content")
        if kind not in MEMORY_KINDS or not isinstance(content, str):
            continue
        if not content.strip():
            continue
        appended.append(
            store.append(
                MemoryEntry(
                    turn_id=turn_id,
                    kind=kind,
                    agent_source="orchestrator",
                    text=content.strip(),
                )
            )
        )
    return tuple(appended), False
