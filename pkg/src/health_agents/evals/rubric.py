"""Hierarchical plan rubric: load the versioned item file, validate answer
sheets against the gating rules, and turn a sheet into a deduction score."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

TOPICS = ("timeframe", "transforms", "availability", "statistics", "alignment")
ANSWERS = ("yes", "no", "n/a")


class RubricError(Exception):
    """The rubric file itself is malformed."""


class InconsistentSheet(Exception):
    """An answer sheet violates the gating rules."""


@dataclass(frozen=True)
class RubricItem:
    id: str
    topic: str
    question: str
    parent: str | None = None
    gate_on: str | None = None
    deducts_on: str | None = None
    weight: int = 1

    def __post_init__(self) -> None:
        if not self.id:
            raise RubricError("item id must be non-empty")
        if self.topic not in TOPICS:
            raise RubricError(f"unknown topic {self.topic!r} on {self.id}")
        if not self.question.strip():
            raise RubricError(f"item {self.id} has an empty question")
        if (self.parent is None) != (self.gate_on is None):
            raise RubricError(f"item {self.id}: parent and gate_on go together")
        if self.gate_on is not None and self.gate_on not in ("yes", "no"):
            raise RubricError(f"item {self.id}: gate_on must be yes or no")
        if self.deducts_on is not None and self.deducts_on not in ("yes", "no"):
            raise RubricError(f"item {self.id}: deducts_on must be yes or no")
        if self.deducts_on is None and self.weight != 0:
            raise RubricError(f"item {self.id}: a pure gate cannot carry weight")
        if self.deducts_on is not None and self.weight <= 0:
            raise RubricError(f"item {self.id}: deducting items need weight >= 1")

    @property
    def is_gate_only(self) -> bool:
        return self.deducts_on is None


@dataclass(frozen=True)
class Rubric:
    items: tuple[RubricItem, ...]
    by_id: Mapping[str, RubricItem] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        by_id: dict[str, RubricItem] = {}
        for item in self.items:
            if item.id in by_id:
                raise RubricError(f"duplicate item id {item.id}")
            if item.parent is not None:
                parent = by_id.get(item.parent)
                if parent is None:
                    raise RubricError(
                        f"item {item.id}: parent {item.parent!r} must be"
                        " declared earlier"
                    )
                if parent.topic != item.topic:
                    raise RubricError(
                        f"item {item.id}: parent crosses topics"
                    )
            by_id[item.id] = item
        object.__setattr__(self, "by_id", by_id)

    def children(self, item_id: str, gate_answer: str) -> tuple[RubricItem, ...]:
        return tuple(
            item
            for item in self.items
            if item.parent == item_id and item.gate_on == gate_answer
        )

    def topic_items(self, topic: str) -> tuple[RubricItem, ...]:
        return tuple(item for item in self.items if item.topic == topic)

    def roots(self) -> tuple[RubricItem, ...]:
        return tuple(item for item in self.items if item.parent is None)

    def _subtree_max(self, item: RubricItem) -> int:
        best = 0
        for answer in ("yes", "no"):
            gained = item.weight if answer == item.deducts_on else 0
            gained += sum(
                self._subtree_max(child) for child in self.children(item.id, answer)
            )
            best = max(best, gained)
        return best

    def max_deduction(self, topic: str | None = None) -> int:
        """Largest total deduction a single consistent sheet can reach."""
        roots = self.roots()
        if topic is not None:
            roots = tuple(item for item in roots if item.topic == topic)
        return sum(self._subtree_max(item) for item in roots)


@dataclass(frozen=True)
class PlanScore:
    deducted: int
    normalized: float
    by_topic: Mapping[str, int]
    max_deduction: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.normalized <= 1.0:
            raise ValueError("normalized score must lie in [0, 1]")


def normalize_answer(value: object) -> str | None:
    """Map free-form answer text onto yes/no/n/a; None when unrecognized."""
    if not isinstance(value, str):
        return None
    text = value.strip().lower().rstrip(".")
    if text in ("yes", "y", "true"):
        return "yes"
    if text in ("no", "n", "false"):
        return "no"
    if text in ("n/a", "na", "not applicable", "none"):
        return "n/a"
    return None


def _gate_satisfied(item: RubricItem, answers: Mapping[str, str]) -> bool:
    if item.parent is None:
        return True
    return answers.get(item.parent) == item.gate_on


def validate_sheet(rubric: Rubric, answers: Mapping[str, str]) -> None:
    """Raise InconsistentSheet unless every item is answered yes/no exactly
    when its gate is satisfied and n/a exactly when it is not."""
    unknown = set(answers) - set(rubric.by_id)
    if unknown:
        raise InconsistentSheet(f"unknown item ids: {sorted(unknown)}")
    for item in rubric.items:
        answer = answers.get(item.id)
        if answer not in ANSWERS:
            raise InconsistentSheet(
                f"item {item.id}: missing or invalid answer {answer!r}"
            )
        if _gate_satisfied(item, answers):
            if answer == "n/a":
                raise InconsistentSheet(
                    f"item {item.id}: n/a recorded although its gate is"
                    " satisfied"
                )
        elif answer != "n/a":
            raise InconsistentSheet(
                f"item {item.id}: answered {answer!r} although its gate is"
                " unsatisfied"
            )


def score_plan(rubric: Rubric, answers: Mapping[str, str]) -> PlanScore:
    """Deterministic deduction sum over a gating-consistent sheet."""
    validate_sheet(rubric, answers)
    by_topic = {topic: 0 for topic in TOPICS}
    deducted = 0
    for item in rubric.items:
        if item.deducts_on is not None and answers[item.id] == item.deducts_on:
            deducted += item.weight
            by_topic[item.topic] += item.weight
    ceiling = rubric.max_deduction()
    normalized = (ceiling - deducted) / ceiling if ceiling else 1.0
    return PlanScore(
        deducted=deducted,
        normalized=normalized,
        by_topic=by_topic,
        max_deduction=ceiling,
    )


def satisfactory_sheet(rubric: Rubric) -> dict[str, str]:
    """A consistent sheet with zero deductions: every gate is answered yes
    and every deducting item gets its non-deducting answer."""
    answers: dict[str, str] = {}
    for item in rubric.items:
        if not _gate_satisfied(item, answers):
            answers[item.id] = "n/a"
        elif item.deducts_on is None:
            answers[item.id] = "yes"
        else:
            answers[item.id] = "no" if item.deducts_on == "yes" else "yes"
    return answers


def _parse_items(raw: Iterable[Mapping[str, object]]) -> tuple[RubricItem, ...]:
    items = []
    for entry in raw:
        items.append(
            RubricItem(
                id=str(entry.get("id", "")),
                topic=str(entry.get("topic", "")),
                question=str(entry.get("question", "")),
                parent=entry.get("parent"),  # type: ignore[arg-type]
                gate_on=entry.get("gate_on"),  # type: ignore[arg-type]
                deducts_on=entry.get("deducts_on"),  # type: ignore[arg-type]
                weight=int(entry.get("weight", 1)),  # type: ignore[arg-type]
            )
        )
    return tuple(items)


def load_rubric(path: str | Path | None = None) -> Rubric:
    if path is None:
        source = resources.files("health_agents.evals") / "data" / "plan_rubric.json"
        payload = json.loads(source.read_text(encoding="utf-8"))
    else:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    raw_items = payload.get("items")
    if not isinstance(raw_items, list) or not raw_items:
        raise RubricError("rubric file has no items")
    return Rubric(items=_parse_items(raw_items))
