"""Bounded self-reflection: question the main agent's draft, re-invoke
supporting agents for anything the personal data can already answer, and
re-prompt the main agent with the new insights."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping

from ..gateway import CompletionRequest, Gateway
from .routing import RoutingDecision, normalize_agent, strip_json_fences

REFLECTION_TEMPLATE = "F.2.4-reflection"
MAX_ROUNDS_DEFAULT = 2


@dataclass(frozen=True)
class ReflectionOutcome:
    decision: str
    questions: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.decision not in ("YES", "NO"):
            raise ValueError(f"bad reflection decision {self.decision!r}")
        if self.decision == "NO" and self.questions:
            raise ValueError("NO decision cannot carry questions")
        if self.decision == "YES" and not self.questions:
            raise ValueError("YES decision needs at least one question")


def _parse_reflection(
    response: str, supporting: tuple[str, ...]
) -> ReflectionOutcome | None:
    try:
        payload = json.loads(strip_json_fences(response))
    except ValueError:
        return None
    if not isinstance(payload, dict):
        return None
    decision = str(payload.get("decision", "")).strip().upper()
    if decision == "NO":
        return ReflectionOutcome(decision="NO")
    if decision != "YES":
        return None
    raw_questions = payload.get("reflection_questions")
    if not isinstance(raw_questions, Mapping):
        return None
    questions: list[tuple[str, str]] = []
    for key, value in raw_questions.items():
        agent = normalize_agent(key)
        if agent is None or agent not in supporting:
            continue
        if not isinstance(value, str) or not value.strip():
            continue
        questions.append((agent, value.strip()))
    if not questions:
        return None
    return ReflectionOutcome(decision="YES", questions=tuple(questions))


@dataclass(frozen=True)
class ReflectionRoundRecord:
    outcome: ReflectionOutcome
    insights: tuple[tuple[str, str], ...] = ()
    revised_response: str = ""


def reflect(
    gateway: Gateway,
    *,
    query: str,
    decision: RoutingDecision,
    supporting_insights: dict[str, list[str]],
    main_response: str,
    reinvoke: Callable[[str, str], str],
    reprompt_main: Callable[[dict[str, list[str]]], str],
    session_id: str = "",
    max_rounds: int = MAX_ROUNDS_DEFAULT,
) -> tuple[tuple[ReflectionRoundRecord, ...], str]:
    """Run up to max_rounds reflection rounds; questioned supporting agents
    are re-invoked concurrently; malformed judge output (after one repair
    re-prompt) counts as NO.  Returns the round records and the possibly
    revised main response."""
    if max_rounds < 0:
        raise ValueError("max_rounds must be non-negative")
    rounds: list[ReflectionRoundRecord] = []

    def render_insights() -> str:
        blocks = []
        for agent, texts in supporting_insights.items():
            for text in texts:
                blocks.append(f"[{agent}] {text}")
        return "\n".join(blocks) if blocks else "(none)"

    def judge() -> ReflectionOutcome:
        variables = {
            "original_question": query,
            "main_agent": decision.main,
            "supporting_agents": ";".join(decision.supporting) or "none",
            "collaboration_workflow": decision.workflow,
            "supporting_agent_insights": render_insights(),
            "main_agent_response": main_response,
        }
        request = CompletionRequest(
            template_id=REFLECTION_TEMPLATE,
            variables=variables,
            agent_tag="orchestrator",
            session_id=session_id,
        )
        outcome = _parse_reflection(gateway.complete(request), decision.supporting)
        if outcome is None:
            outcome = _parse_reflection(
                gateway.complete(request), decision.supporting
            )
        return outcome if outcome is not None else ReflectionOutcome(decision="NO")

    for _ in range(max_rounds):
        outcome = judge()
        if outcome.decision == "NO":
            rounds.append(ReflectionRoundRecord(outcome=outcome))
            break
        if len(outcome.questions) == 1:
            agent, question = outcome.questions[0]
            gathered = [(agent, reinvoke(agent, question))]
        else:
            with ThreadPoolExecutor(max_workers=len(outcome.questions)) as pool:
                futures = [
                    (agent, pool.submit(reinvoke, agent, question))
                    for agent, question in outcome.questions
                ]
                gathered = [(agent, future.result()) for agent, future in futures]
        for agent, insight in gathered:
            supporting_insights.setdefault(agent, []).append(insight)
        main_response = reprompt_main(supporting_insights)
        rounds.append(
            ReflectionRoundRecord(
                outcome=outcome,
                insights=tuple(gathered),
                revised_response=main_response,
            )
        )
    return tuple(rounds), main_response
