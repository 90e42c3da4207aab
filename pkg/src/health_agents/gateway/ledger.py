"""Append-only per-session record of model calls, sliceable by turn."""

from __future__ import annotations

import threading
from dataclasses import dataclass


class UnknownTurn(Exception):
    pass


@dataclass(frozen=True)
class CallRecord:
    agent_tag: str
    template_id: str
    prompt_chars: int
    response_chars: int
    wall_time: float


class CallLedger:
    """Single-writer appender; reads return immutable snapshots."""

    def __init__(self) -> None:
        self._records: list[CallRecord] = []
        self._turn_starts: dict[int, int] = {}
        self._turn_order: list[int] = []
        self._lock = threading.Lock()

    def append(self, record: CallRecord) -> None:
        with self._lock:
            self._records.append(record)

    def begin_turn(self, turn_id: int) -> None:
        with self._lock:
            if turn_id in self._turn_starts:
                raise ValueError(f"turn {turn_id} already begun")
            self._turn_starts[turn_id] = len(self._records)
            self._turn_order.append(turn_id)

    def records(self) -> tuple[CallRecord, ...]:
        with self._lock:
            return tuple(self._records)

    def turn_ids(self) -> tuple[int, ...]:
        with self._lock:
            return tuple(self._turn_order)

    def turn_slice(self, turn_id: int) -> tuple[CallRecord, ...]:
        with self._lock:
            if turn_id not in self._turn_starts:
                raise UnknownTurn(f"turn {turn_id} has no recorded boundary")
            start = self._turn_starts[turn_id]
            position = self._turn_order.index(turn_id)
            if position + 1 < len(self._turn_order):
                end = self._turn_starts[self._turn_order[position + 1]]
            else:
                end = len(self._records)
            return tuple(self._records[start:end])

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)


def turn_cost(ledger: CallLedger, turn_id: int) -> dict[str, float]:
    calls = ledger.turn_slice(turn_id)
    return {
        "llm_calls": len(calls),
        "wall_time": sum(record.wall_time for record in calls),
    }
