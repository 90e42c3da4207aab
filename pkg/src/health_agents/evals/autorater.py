"""Model-driven grading of analysis plans against the hierarchical rubric.

One completion per rubric topic; the final alignment item is asked last
with all prior answers in its prompt. Items the model leaves unanswered or
malformed are defaulted conservatively (the deducting answer) and flagged,
and gating consistency is restored mechanically so the resulting sheet
always scores."""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..gateway import CompletionRequest, Gateway
from ..orchestrator.routing import strip_json_fences
from .rubric import Rubric, RubricItem, normalize_answer

TOPIC_TEMPLATE = "autorate-topic"
ALIGNMENT_TEMPLATE = "autorate-alignment"
GRADED_TOPICS = ("timeframe", "transforms", "availability", "statistics")
ALIGNMENT_TOPIC = "alignment"

# pure gates default open so the deeper (stricter) branch stays ratable
_GATE_DEFAULT = "yes"


@dataclass(frozen=True)
class AutorateResult:
    sheet: dict[str, str]
    flagged: tuple[str, ...]

    @property
    def clean(self) -> bool:
        return not self.flagged


def _questions_block(items: tuple[RubricItem, ...]) -> str:
    lines = []
    for item in items:
        suffix = ""
        if item.parent is not None:
            suffix = (
                f' (answer only if {item.parent} is "{item.gate_on}";'
                ' otherwise answer "n/a")'
            )
        lines.append(f"- {item.id}: {item.question}{suffix}")
    return "\n".join(lines)


def _parse_topic_response(response: str) -> dict[str, str]:
    try:
        payload = json.loads(strip_json_fences(response))
    except ValueError:
        return {}
    if not isinstance(payload, dict):
        return {}
    parsed: dict[str, str] = {}
    for key, value in payload.items():
        answer = normalize_answer(value)
        if answer is not None:
            parsed[str(key).strip()] = answer
    return parsed


def _default_answer(item: RubricItem) -> str:
    if item.deducts_on is None:
        return _GATE_DEFAULT
    return item.deducts_on


def _reconcile(
    items: tuple[RubricItem, ...],
    parsed: dict[str, str],
    sheet: dict[str, str],
    flagged: list[str],
) -> None:
    """Fold one topic's parsed answers into the sheet, forcing gating
    consistency and conservative defaults. Items are declared parents-first,
    so one pass suffices."""
    for item in items:
        if item.parent is not None and sheet.get(item.parent) != item.gate_on:
            if parsed.get(item.id) not in (None, "n/a"):
                flagged.append(item.id)
            sheet[item.id] = "n/a"
            continue
        answer = parsed.get(item.id)
        if answer in ("yes", "no"):
            sheet[item.id] = answer
        else:
            sheet[item.id] = _default_answer(item)
            flagged.append(item.id)


def _render_prior(sheet: dict[str, str]) -> str:
    return "\n".join(f"- {item_id}: {answer}" for item_id, answer in sheet.items())


def autorate_plan(
    gateway: Gateway,
    *,
    query: str,
    data_summary: str,
    plan: str,
    rubric: Rubric,
    session_id: str = "",
) -> AutorateResult:
    """Grade a plan: one call per graded topic plus the alignment call."""
    sheet: dict[str, str] = {}
    flagged: list[str] = []

    def complete(template_id: str, variables: dict[str, str]) -> str:
        return gateway.complete(
            CompletionRequest(
                template_id=template_id,
                variables=variables,
                agent_tag="baseline",
                session_id=session_id,
            )
        )

    for topic in GRADED_TOPICS:
        items = rubric.topic_items(topic)
        response = complete(
            TOPIC_TEMPLATE,
            {
                "query": query,
                "data_summary": data_summary,
                "plan": plan,
                "topic": topic,
                "questions_block": _questions_block(items),
            },
        )
        _reconcile(items, _parse_topic_response(response), sheet, flagged)

    alignment_items = rubric.topic_items(ALIGNMENT_TOPIC)
    response = complete(
        ALIGNMENT_TEMPLATE,
        {
            "query": query,
            "data_summary": data_summary,
            "plan": plan,
            "topic": ALIGNMENT_TOPIC,
            "prior_answers": _render_prior(sheet),
            "questions_block": _questions_block(alignment_items),
        },
    )
    _reconcile(alignment_items, _parse_topic_response(response), sheet, flagged)
    return AutorateResult(sheet=sheet, flagged=tuple(flagged))
