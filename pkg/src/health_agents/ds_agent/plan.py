"""Analysis-plan parsing: marker-based sections plus step-kind heuristics."""

from __future__ import annotations

import re
from dataclasses import dataclass

DISCUSSION_MARKER = "== Discussion =="
APPROACH_MARKER = "== Approach =="

STEP_KINDS = (
    "timeframe",
    "selection_filter",
    "transform",
    "sufficiency_check",
    "statistics",
    "output",
    "unanswerable",
)


class PlanParseError(Exception):
    pass


@dataclass(frozen=True)
class PlanStep:
    kind: str
    text: str


@dataclass(frozen=True)
class AnalysisPlan:
    discussion: str
    steps: tuple[PlanStep, ...]
    raw: str

    @property
    def unanswerable(self) -> bool:
        return any(step.kind == "unanswerable" for step in self.steps)

    @property
    def approach_text(self) -> str:
        start = self.raw.index(APPROACH_MARKER) + len(APPROACH_MARKER)
        return self.raw[start:].strip()


_STEP_SPLIT = re.compile(r"^\s*\d+\.\s+", re.MULTILINE)

_STATISTICS_WORDS = (
    "statistic",
    "t-test",
    "correlation",
    "shapiro",
    "mann-whitney",
    "p-value",
    "anova",
    "median",
    "mean",
    "std dev",
    "standard deviation",
    "distribution",
)
_SUFFICIENCY_WORDS = (
    "sufficien",
    "missing value",
    "at least",
    "null",
    "enough data",
    "data availability",
)
_TIMEFRAME_WORDS = (
    "timeframe",
    "time frame",
    "start and end",
    "date range",
    "analysis period",
    "last 1 year",
    "last month",
    "last week",
    "last year",
)
_FILTER_WORDS = ("filter", "select", "subset", "column(s) required", "exclude rows")
_OUTPUT_LEADS = ("return", "output", "report", "produce")


def classify_step(text: str) -> str:
    lowered = text.strip().lower()
    if "cannot be answered" in lowered:
        return "unanswerable"
    first_word = lowered.split(None, 1)[0].rstrip(":,") if lowered else ""
    if first_word in _OUTPUT_LEADS:
        return "output"
    if any(word in lowered for word in _SUFFICIENCY_WORDS):
        return "sufficiency_check"
    if any(word in lowered for word in _STATISTICS_WORDS):
        return "statistics"
    if any(word in lowered for word in _TIMEFRAME_WORDS):
        return "timeframe"
    if any(word in lowered for word in _FILTER_WORDS):
        return "selection_filter"
    return "transform"


def parse_plan(response: str) -> AnalysisPlan:
    """Parse a plan response.

    The plan prompt ends with the Discussion marker, so responses may start
    mid-section; the marker is prepended when absent.
    """
    text = response.strip()
    if not text:
        raise PlanParseError("empty plan response")
    if DISCUSSION_MARKER not in text:
        text = f"{DISCUSSION_MARKER}\n{text}"

    if text.count(DISCUSSION_MARKER) != 1 or text.count(APPROACH_MARKER) != 1:
        raise PlanParseError(
            "plan must contain exactly one Discussion and one Approach section, got "
            f"{text.count(DISCUSSION_MARKER)} and {text.count(APPROACH_MARKER)}"
        )
    discussion_start = text.index(DISCUSSION_MARKER) + len(DISCUSSION_MARKER)
    approach_start = text.index(APPROACH_MARKER)
    if approach_start < discussion_start:
        raise PlanParseError("Approach section precedes Discussion section")
    discussion = text[discussion_start:approach_start].strip()
    approach = text[approach_start + len(APPROACH_MARKER) :].strip()

    if not _STEP_SPLIT.search(approach):
        raise PlanParseError("Approach section contains no numbered steps")
    pieces = [p.strip() for p in _STEP_SPLIT.split(approach) if p.strip()]
    if not pieces:
        raise PlanParseError("Approach section contains no numbered steps")
    steps = tuple(PlanStep(kind=classify_step(p), text=p) for p in pieces)

    unanswerable = [s for s in steps if s.kind == "unanswerable"]
    if unanswerable and len(steps) > 1:
        raise PlanParseError("an unanswerable step must be the only step")
    return AnalysisPlan(discussion=discussion, steps=steps, raw=text)
