"""Replayable record of every turn: routing, sub-queries, agent
exchanges, reflection rounds, memory writes, reply, and cost."""

from __future__ import annotations

from dataclasses import dataclass, field

from .memory import MemoryEntry
from .reflection import ReflectionOutcome, ReflectionRoundRecord
from .routing import RoutingDecision


@dataclass(frozen=True)
class AgentExchange:
    agent: str
    sub_query: str
    response: str
    role: str = "main"

    def __post_init__(self) -> None:
        if self.role not in ("main", "supporting", "synthesis"):
            raise ValueError(f"bad exchange role {self.role!r}")


@dataclass(frozen=True)
class TurnTrace:
    turn_id: int
    user_message: str
    mode: str
    reply: str
    label: str = ""
    routing: RoutingDecision | None = None
    rephrased: tuple[tuple[str, str], ...] = ()
    rephrase_fallback: bool = False
    exchanges: tuple[AgentExchange, ...] = ()
    reflection_rounds: tuple[ReflectionRoundRecord, ...] = ()
    memory_entries: tuple[MemoryEntry, ...] = ()
    memory_flagged: bool = False
    llm_calls: int = 0
    wall_time: float = 0.0
    notes: tuple[str, ...] = ()


class SessionTrace:
    def __init__(self, session_id: str, mode: str, persona_id: str = ""):
        self.session_id = session_id
        self.mode = mode
        self.persona_id = persona_id
        self.turns: list[TurnTrace] = []

    def add_turn(self, turn: TurnTrace) -> None:
        if self.turns and turn.turn_id <= self.turns[-1].turn_id:
            raise ValueError("turn ids must strictly increase")
        self.turns.append(turn)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "mode": self.mode,
            "persona_id": self.persona_id,
            "turns": [_turn_to_dict(turn) for turn in self.turns],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SessionTrace":
        trace = cls(
            session_id=payload["session_id"],
            mode=payload["mode"],
            persona_id=payload.get("persona_id", ""),
        )
        for raw in payload.get("turns", []):
            trace.add_turn(_turn_from_dict(raw))
        return trace


def _routing_to_dict(decision: RoutingDecision | None) -> dict | None:
    if decision is None:
        return None
    return {
        "main": decision.main,
        "supporting": list(decision.supporting),
        "workflow": decision.workflow,
        "source": decision.source,
    }


def _routing_from_dict(raw: dict | None) -> RoutingDecision | None:
    if raw is None:
        return None
    return RoutingDecision(
        main=raw["main"],
        supporting=tuple(raw.get("supporting", ())),
        workflow=raw.get("workflow", ""),
        source=raw.get("source", "matrix"),
    )


def _turn_to_dict(turn: TurnTrace) -> dict:
    return {
        "turn_id": turn.turn_id,
        "user_message": turn.user_message,
        "mode": turn.mode,
        "reply": turn.reply,
        "label": turn.label,
        "routing": _routing_to_dict(turn.routing),
        "rephrased": [list(pair) for pair in turn.rephrased],
        "rephrase_fallback": turn.rephrase_fallback,
        "exchanges": [
            {
                "agent": exchange.agent,
                "sub_query": exchange.sub_query,
                "response": exchange.response,
                "role": exchange.role,
            }
            for exchange in turn.exchanges
        ],
        "reflection_rounds": [
            {
                "decision": record.outcome.decision,
                "questions": [list(pair) for pair in record.outcome.questions],
                "insights": [list(pair) for pair in record.insights],
                "revised_response": record.revised_response,
            }
            for record in turn.reflection_rounds
        ],
        "memory_entries": [
            {
                "turn_id": entry.turn_id,
                "kind": entry.kind,
                "agent_source": entry.agent_source,
                "text": entry.text,
            }
            for entry in turn.memory_entries
        ],
        "memory_flagged": turn.memory_flagged,
        "llm_calls": turn.llm_calls,
        "wall_time": turn.wall_time,
        "notes": list(turn.notes),
    }


def _turn_from_dict(raw: dict) -> TurnTrace:
    return TurnTrace(
        turn_id=raw["turn_id"],
        user_message=raw["user_message"],
        mode=raw["mode"],
        reply=raw["reply"],
        label=raw.get("label", ""),
        routing=_routing_from_dict(raw.get("routing")),
        rephrased=tuple(
            (pair[0], pair[1]) for pair in raw.get("rephrased", ())
        ),
        rephrase_fallback=raw.get("rephrase_fallback", False),
        exchanges=tuple(
            AgentExchange(
                agent=item["agent"],
                sub_query=item["sub_query"],
                response=item["response"],
                role=item.get("role", "main"),
            )
            for item in raw.get("exchanges", ())
        ),
        reflection_rounds=tuple(
            ReflectionRoundRecord(
                outcome=ReflectionOutcome(
                    decision=item["decision"],
                    questions=tuple(
                        (pair[0], pair[1]) for pair in item.get("questions", ())
                    ),
                ),
                insights=tuple(
                    (pair[0], pair[1]) for pair in item.get("insights", ())
                ),
                revised_response=item.get("revised_response", ""),
            )
            for item in raw.get("reflection_rounds", ())
        ),
        memory_entries=tuple(
            MemoryEntry(
                turn_id=item["turn_id"],
                kind=item["kind"],
                agent_source=item.get("agent_source", ""),
                text=item["text"],
            )
            for item in raw.get("memory_entries", ())
        ),
        memory_flagged=raw.get("memory_flagged", False),
        llm_calls=raw.get("llm_calls", 0),
        wall_time=raw.get("wall_time", 0.0),
        notes=tuple(raw.get("notes", ())),
    )
