"""Need classification, agent assignment against the collaboration
matrix, and per-agent sub-query rephrasal."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..gateway import CompletionRequest, Gateway
from .matrix import AGENTS, CollaborationMatrix, MatrixRow

CLASSIFY_TEMPLATE = "cuj-classify"
ASSIGN_TEMPLATE = "F.2.2-assign"
REPHRASE_TEMPLATE = "F.2.3-rephrase"

CUJ_LABELS = ("CUJ1", "CUJ2", "CUJ3", "CUJ4", "other")
FALLBACK_WORKFLOW = "Fall back to a plain completion."

_CUJ_RE = re.compile(r"\bCUJ([1-4])\b", re.IGNORECASE)
_AGENT_ALIASES = {
    "ds": "ds",
    "de": "de",
    "hc": "hc",
    "data science agent": "ds",
    "data science": "ds",
    "ds agent": "ds",
    "domain expert agent": "de",
    "domain expert": "de",
    "de agent": "de",
    "health coach agent": "hc",
    "health coach": "hc",
    "hc agent": "hc",
}


@dataclass(frozen=True)
class RoutingDecision:
    main: str
    supporting: tuple[str, ...] = ()
    workflow: str = ""
    source: str = "matrix"

    def __post_init__(self) -> None:
        if self.main not in AGENTS + ("none",):
            raise ValueError(f"bad main agent {self.main!r}")
        for agent in self.supporting:
            if agent not in AGENTS:
                raise ValueError(f"bad supporting agent {agent!r}")
            if agent == self.main:
                raise ValueError("main agent listed as supporting")
        if len(set(self.supporting)) != len(self.supporting):
            raise ValueError("duplicate supporting agent")
        if (self.main == "none") != (self.source == "fallback"):
            raise ValueError("main agent 'none' is exactly the fallback path")
        if self.main == "none" and self.supporting:
            raise ValueError("fallback decision cannot have supporting agents")
        if self.source not in ("matrix", "model", "fallback"):
            raise ValueError(f"bad decision source {self.source!r}")

    @property
    def fallback(self) -> bool:
        return self.main == "none"

    def agents(self) -> tuple[str, ...]:
        if self.fallback:
            return ()
        return (self.main,) + self.supporting


def fallback_decision() -> RoutingDecision:
    return RoutingDecision(
        main="none", supporting=(), workflow=FALLBACK_WORKFLOW, source="fallback"
    )


def decision_from_row(row: MatrixRow) -> RoutingDecision:
    return RoutingDecision(
        main=row.main,
        supporting=row.supporting,
        workflow=row.workflow,
        source="matrix",
    )


def normalize_agent(name: object) -> str | None:
    if not isinstance(name, str):
        return None
    return _AGENT_ALIASES.get(name.strip().lower())


def classify_need(
    gateway: Gateway, query: str, conversation: str = "", session_id: str = ""
) -> str:
    """One of CUJ1..CUJ4 or 'other'; parse failures default to 'other'."""
    del conversation
    response = gateway.complete(
        CompletionRequest(
            template_id=CLASSIFY_TEMPLATE,
            variables={"query": query},
            agent_tag="orchestrator",
            session_id=session_id,
        )
    )
    match = _CUJ_RE.search(response)
    if match:
        return f"CUJ{match.group(1)}"
    return "other"


def strip_json_fences(text: str) -> str:
    stripped = text.strip()
    if stripped.startswith("```"):
        stripped = stripped.split("\n", 1)[1] if "\n" in stripped else ""
        if stripped.rstrip().endswith("```"):
            stripped = stripped.rstrip()[:-3]
    if stripped.lstrip().lower().startswith("json\n"):
        stripped = stripped.lstrip()[5:]
    return stripped.strip()


def _parse_assignment(response: str) -> RoutingDecision | None:
    try:
        payload = json.loads(strip_json_fences(response))
    except ValueError:
        return None
    if not isinstance(payload, dict):
        return None
    raw_main = payload.get("main_agent", "")
    if isinstance(raw_main, str) and not raw_main.strip():
        return fallback_decision()
    main = normalize_agent(raw_main)
    if main is None:
        return None
    raw_supporting = payload.get("supporting_agents", "")
    supporting: list[str] = []
    if isinstance(raw_supporting, str):
        pieces = [piece for piece in raw_supporting.split(";") if piece.strip()]
    elif isinstance(raw_supporting, list):
        pieces = [str(piece) for piece in raw_supporting]
    else:
        pieces = []
    for piece in pieces:
        agent = normalize_agent(piece)
        if agent is not None and agent != main and agent not in supporting:
            supporting.append(agent)
    workflow = str(payload.get("collaboration_workflow", ""))
    return RoutingDecision(
        main=main, supporting=tuple(supporting), workflow=workflow, source="model"
    )


def assign_agents(
    gateway: Gateway,
    query: str,
    topic: str,
    matrix: CollaborationMatrix,
    conversation: str = "",
    session_id: str = "",
) -> RoutingDecision:
    """Corner cases fall back; exact matrix matches route locally without a
    model call; everything else is decided by the assignment prompt, with
    unparseable output falling back (the step is total)."""
    if matrix.is_corner_case(query):
        return fallback_decision()
    row = matrix.match_exact(query)
    if row is not None:
        return decision_from_row(row)
    response = gateway.complete(
        CompletionRequest(
            template_id=ASSIGN_TEMPLATE,
            variables={
                "conversation": conversation or query,
                "corner_cases": matrix.render_corner_cases(),
                "matrix_examples": matrix.render_examples(),
                "topic": topic,
            },
            agent_tag="orchestrator",
            session_id=session_id,
        )
    )
    decision = _parse_assignment(response)
    if decision is None:
        return fallback_decision()
    return decision


def ensure_ds_support(
    decision: RoutingDecision, personal_data_relevant: bool
) -> RoutingDecision:
    """Pure normalization: a personal-data-relevant query whose main agent
    is not ds gets ds appended to the supporting set."""
    if not personal_data_relevant or decision.fallback:
        return decision
    if decision.main == "ds" or "ds" in decision.supporting:
        return decision
    return RoutingDecision(
        main=decision.main,
        supporting=decision.supporting + ("ds",),
        workflow=decision.workflow,
        source=decision.source,
    )


def _parse_rephrasal(
    response: str, agents: tuple[str, ...]
) -> dict[str, str] | None:
    try:
        payload = json.loads(strip_json_fences(response))
    except ValueError:
        return None
    if not isinstance(payload, dict):
        return None
    mapping: dict[str, str] = {}
    for key, value in payload.items():
        agent = normalize_agent(key)
        if agent is None or not isinstance(value, str) or not value.strip():
            continue
        mapping[agent] = value.strip()
    if set(mapping) >= set(agents):
        return {agent: mapping[agent] for agent in agents}
    return None


def rephrase(
    gateway: Gateway,
    query: str,
    decision: RoutingDecision,
    session_id: str = "",
) -> tuple[dict[str, str], bool]:
    """Per-agent sub-queries covering main plus supporting; two parse
    failures fall back to the identity rephrasal (flag returned True)."""
    if decision.fallback:
        raise ValueError("cannot rephrase for the fallback path")
    agents = decision.agents()
    variables = {
        "original_question": query,
        "main_agent": decision.main,
        "supporting_agents": ";".join(decision.supporting) or "none",
        "collaboration_workflow": decision.workflow,
    }

    def attempt() -> dict[str, str] | None:
        response = gateway.complete(
            CompletionRequest(
                template_id=REPHRASE_TEMPLATE,
                variables=variables,
                agent_tag="orchestrator",
                session_id=session_id,
            )
        )
        return _parse_rephrasal(response, agents)

    mapping = attempt()
    if mapping is None:
        mapping = attempt()
    if mapping is None:
        return {agent: query for agent in agents}, True
    return mapping, False
