"""The single chokepoint for model calls: render, complete, record."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Mapping

from .backends import Backend
from .ledger import CallLedger, CallRecord
from .templates import TemplateRegistry, load_default_registry

AGENT_TAGS = frozenset({"orchestrator", "ds", "de", "hc", "baseline"})


@dataclass(frozen=True)
class CompletionParams:
    max_tokens: int | None = None
    temperature: float = 0.0
    stop_sequences: tuple[str, ...] = ()


@dataclass(frozen=True)
class CompletionRequest:
    template_id: str
    variables: Mapping[str, object]
    agent_tag: str
    session_id: str = ""
    params: CompletionParams = field(default_factory=CompletionParams)

    def __post_init__(self) -> None:
        if self.agent_tag not in AGENT_TAGS:
            raise ValueError(
                f"agent_tag {self.agent_tag!r} not in {sorted(AGENT_TAGS)}"
            )


class Gateway:
    """Renders templates, delegates to a backend, and keeps per-session ledgers."""

    def __init__(self, backend: Backend, registry: TemplateRegistry | None = None) -> None:
        self.backend = backend
        self.registry = registry if registry is not None else load_default_registry()
        self._ledgers: dict[str, CallLedger] = {}
        self._lock = threading.Lock()

    def ledger(self, session_id: str = "") -> CallLedger:
        with self._lock:
            if session_id not in self._ledgers:
                self._ledgers[session_id] = CallLedger()
            return self._ledgers[session_id]

    def begin_turn(self, session_id: str, turn_id: int) -> None:
        self.ledger(session_id).begin_turn(turn_id)

    def complete(self, request: CompletionRequest) -> str:
        prompt = self.registry.render(request.template_id, request.variables)
        started = time.perf_counter()
        text = self.backend.generate(request, prompt)
        wall_time = time.perf_counter() - started
        for stop in request.params.stop_sequences:
            cut = text.find(stop)
            if cut != -1:
                text = text[:cut]
        self.ledger(request.session_id).append(
            CallRecord(
                agent_tag=request.agent_tag,
                template_id=request.template_id,
                prompt_chars=len(prompt),
                response_chars=len(text),
                wall_time=wall_time,
            )
        )
        return text
