"""Differential-diagnosis ranking accuracy.

Each case pairs a correct diagnosis with a model's ranked top-10 list. A
judge maps the pair to the truth's rank (1..10) or the penalty rank 11
when the truth is absent. Accuracy is the fraction of scored cases whose
rank falls inside the top-k cutoff; cases whose judge output cannot be
parsed are excluded from the denominator but counted."""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

from ..gateway import CompletionRequest, Gateway

PENALTY_RANK = 11
JUDGE_TEMPLATE = "D.2.4-ddx-judge"


class JudgeParseError(Exception):
    """The judge's output does not resolve to a rank."""


@dataclass(frozen=True)
class DdxCase:
    case_id: str
    correct_diagnosis: str
    predictions: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.predictions) != 10:
            raise ValueError(
                f"case {self.case_id}: needs exactly 10 predictions,"
                f" got {len(self.predictions)}"
            )

    def rendered_response(self) -> str:
        lines = ["**Top 10 Ranked Diagnoses:**"]
        lines.extend(
            f"{position}. {name}"
            for position, name in enumerate(self.predictions, start=1)
        )
        return "\n".join(lines)


@dataclass(frozen=True)
class DdxScore:
    ranks: tuple[int, ...]
    excluded: int

    def __post_init__(self) -> None:
        for rank in self.ranks:
            if not 1 <= rank <= PENALTY_RANK:
                raise ValueError(f"rank out of range: {rank}")
        if self.excluded < 0:
            raise ValueError("excluded count cannot be negative")

    def top_k(self, k: int) -> float:
        if not self.ranks:
            return 0.0
        return sum(1 for rank in self.ranks if rank <= k) / len(self.ranks)

    @property
    def top1(self) -> float:
        return self.top_k(1)

    @property
    def top5(self) -> float:
        return self.top_k(5)

    @property
    def top10(self) -> float:
        return self.top_k(10)

    def to_json_dict(self) -> dict:
        return {
            "scored_cases": len(self.ranks),
            "excluded_cases": self.excluded,
            "ranks": list(self.ranks),
            "top1": self.top1,
            "top5": self.top5,
            "top10": self.top10,
        }


class DdxJudge(Protocol):
    def rank(self, case: DdxCase) -> int: ...


def _normalize(text: str) -> str:
    folded = unicodedata.normalize("NFKD", text).casefold()
    return re.sub(r"[^a-z0-9]+", " ", folded).strip()


class ExactMatchJudge:
    """Offline judge: normalized string equality against each prediction."""

    def rank(self, case: DdxCase) -> int:
        wanted = _normalize(case.correct_diagnosis)
        for position, prediction in enumerate(case.predictions, start=1):
            if _normalize(prediction) == wanted:
                return position
        return PENALTY_RANK


_INT_PATTERN = re.compile(r"^-?\d+$")


class LlmDdxJudge:
    """Model-backed judge; answers with the integer rank or NaN."""

    def __init__(self, gateway: Gateway, *, session_id: str = "ddx-judge") -> None:
        self._gateway = gateway
        self._session_id = session_id

    def rank(self, case: DdxCase) -> int:
        request = CompletionRequest(
            template_id=JUDGE_TEMPLATE,
            variables={
                "model_response": case.rendered_response(),
                "correct_answer": case.correct_diagnosis,
            },
            agent_tag="baseline",
            session_id=self._session_id,
        )
        raw = self._gateway.complete(request).strip()
        token = raw.splitlines()[0].strip() if raw else ""
        if token.lower() == "nan":
            return PENALTY_RANK
        if _INT_PATTERN.match(token):
            value = int(token)
            if 1 <= value <= 10:
                return value
        raise JudgeParseError(f"case {case.case_id}: unusable judge output {raw!r}")


def score_ddx(cases: Sequence[DdxCase], judge: DdxJudge) -> DdxScore:
    ranks: list[int] = []
    excluded = 0
    for case in cases:
        try:
            ranks.append(judge.rank(case))
        except JudgeParseError:
            excluded += 1
    return DdxScore(ranks=tuple(ranks), excluded=excluded)


def _default_cases_path():
    return resources.files("health_agents.evals") / "data" / "ddx_cases.json"


def load_ddx_fixture(path: str | Path | None = None) -> tuple[DdxCase, ...]:
    if path is None:
        payload = json.loads(_default_cases_path().read_text(encoding="utf-8"))
    else:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return tuple(
        DdxCase(
            case_id=str(raw["id"]),
            correct_diagnosis=str(raw["correct_diagnosis"]),
            predictions=tuple(str(item) for item in raw["predictions"]),
        )
        for raw in payload["cases"]
    )
