"""Domain-expert agent: grounded answers, health summaries, ranked
differential diagnoses, and multiple-choice answers.

Citations are enforced structurally: only URLs that were actually seen in
tool observations are surfaced as citations, so fabricated links never
reach the caller.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..data_model import (
    PersonaProfile,
    WearableTables,
    render_persona,
    summarize_schema,
)
from ..gateway import CompletionRequest, Gateway
from .react import MAX_STEPS_DEFAULT, ReActTrace, run_react
from .tools import ToolRegistry, build_fixture_tools

SUMMARY_TEMPLATE = "D.2.1-summary"
SUMMARY_RETRY_TEMPLATE = "D.2.1-summary-retry"
MCQ_TEMPLATE = "D.2.3-mcq"
MCQ5_TEMPLATE = "D.2.3-mcq5"
DDX_TEMPLATE = "D.2.4-ddx"
DDX_RETRY_TEMPLATE = "D.2.4-ddx-retry"

DDX_SIZE = 10

SUMMARY_SECTIONS = (
    "Overall Summary",
    "Detailed Analysis and Contextualization",
    "Missing Data",
    "Actionable Steps",
    "Citation and Additional Resources",
)
_OPTIONAL_SECTIONS = frozenset({"Missing Data"})

_URL_RE = re.compile(r"https?://[^\s)\]>\"']+")
_MARKDOWN_LINK_RE = re.compile(r"\[([^\]]+)\]\((https?://[^\s)]+)\)")
_RANKED_RE = re.compile(r"^\s*Ranked\s+(\d+)\s+Diagnosis:\s*(.+?)\s*$", re.MULTILINE)
_MCQ_RE = re.compile(r"^\s*Correct:\s*([A-Za-z])\b", re.MULTILINE)


class TemplateViolation(Exception):
    pass


class ParseError(Exception):
    pass


class LetterOutOfRange(Exception):
    pass


class EmptyInput(Exception):
    pass


@dataclass(frozen=True)
class Citation:
    label: str
    url: str


@dataclass(frozen=True)
class DEAnswer:
    body: str
    citations: tuple[Citation, ...] = ()
    missing_data_requests: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for citation in self.citations:
            if citation.url not in self.body:
                raise ValueError(f"citation url not in body: {citation.url}")


@dataclass(frozen=True)
class DdxResult:
    reasoning: str
    ranked: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.ranked) != DDX_SIZE:
            raise ValueError(f"need exactly {DDX_SIZE} ranked diagnoses")
        if any(not entry.strip() for entry in self.ranked):
            raise ValueError("ranked diagnoses must be non-empty")


@dataclass(frozen=True)
class McqAnswer:
    letter: str
    rationale: str


def extract_urls(text: str) -> tuple[str, ...]:
    seen: list[str] = []
    for raw in _URL_RE.findall(text):
        url = raw.rstrip(".,;:!?")
        if url not in seen:
            seen.append(url)
    return tuple(seen)


def contained_citations(body: str, observations: tuple[str, ...]) -> tuple[Citation, ...]:
    """URLs cited in the body that were actually seen in observations."""
    observed: set[str] = set()
    for observation in observations:
        observed.update(extract_urls(observation))
    labels = {url: label for label, url in _MARKDOWN_LINK_RE.findall(body)}
    citations = []
    for url in extract_urls(body):
        if url in observed:
            citations.append(Citation(label=labels.get(url, url), url=url))
    return tuple(citations)


def check_summary_sections(body: str) -> bool:
    """Pure predicate: required section titles present, all in order."""
    cursor = -1
    for title in SUMMARY_SECTIONS:
        position = body.find(title)
        if position < 0:
            if title in _OPTIONAL_SECTIONS:
                continue
            return False
        if position < cursor:
            return False
        cursor = position
    return True


def _missing_data_requests(body: str) -> tuple[str, ...]:
    marker = body.find("Missing Data")
    if marker < 0:
        return ()
    tail = body[marker:]
    end = len(tail)
    for title in ("Actionable Steps", "Citation and Additional Resources"):
        position = tail.find(title)
        if position > 0:
            end = min(end, position)
    requests = []
    for line in tail[:end].splitlines()[1:]:
        stripped = line.strip().lstrip("-*").strip()
        if stripped:
            requests.append(stripped)
    return tuple(requests)


class DomainExpertAgent:
    def __init__(
        self,
        gateway: Gateway,
        tools: ToolRegistry | None = None,
        session_id: str = "",
        max_steps: int = MAX_STEPS_DEFAULT,
    ):
        self.gateway = gateway
        self.tools = tools if tools is not None else build_fixture_tools()
        self.session_id = session_id
        self.max_steps = max_steps

    def _complete(self, template_id: str, variables: dict[str, str]) -> str:
        return self.gateway.complete(
            CompletionRequest(
                template_id=template_id,
                variables=variables,
                agent_tag="de",
                session_id=self.session_id,
            )
        )

    def _context_block(
        self,
        persona: PersonaProfile | None,
        tables: WearableTables | None,
        extra: str = "",
    ) -> str:
        parts = []
        if persona is not None:
            parts.append(render_persona(persona).strip())
        if tables is not None:
            parts.append(summarize_schema(tables).render())
        if extra:
            parts.append(extra)
        return "\n\n".join(parts)

    def answer_query(
        self,
        query: str,
        persona: PersonaProfile | None = None,
        tables: WearableTables | None = None,
        context: str = "",
        max_steps: int | None = None,
    ) -> tuple[DEAnswer, ReActTrace]:
        """Answer via the reason-act loop; citations come from observations."""
        if not query.strip():
            raise EmptyInput("query is empty")
        trace = run_react(
            self.gateway,
            query,
            self.tools,
            agent_tag="de",
            session_id=self.session_id,
            context_block=self._context_block(persona, tables, context),
            max_steps=max_steps if max_steps is not None else self.max_steps,
        )
        answer = DEAnswer(
            body=trace.final,
            citations=contained_citations(trace.final, trace.observations()),
            missing_data_requests=_missing_data_requests(trace.final),
        )
        return answer, trace

    def generate_summary(
        self,
        persona: PersonaProfile | None,
        tables: WearableTables | None,
        observations: tuple[str, ...] = (),
    ) -> DEAnswer:
        """Sectioned health summary; one format repair, then TemplateViolation."""
        if tables is not None and (
            tables.summary or tables.activities or tables.population
        ):
            data_block = summarize_schema(tables).render()
        else:
            data_block = "No wearable data is available for this user."
        variables = {
            "persona_block": render_persona(persona).strip() if persona else "",
            "data_block": data_block,
            "observations_block": "\n".join(observations),
        }
        body = self._complete(SUMMARY_TEMPLATE, variables)
        if not check_summary_sections(body):
            body = self._complete(SUMMARY_RETRY_TEMPLATE, variables)
            if not check_summary_sections(body):
                raise TemplateViolation("summary sections missing or out of order")
        return DEAnswer(
            body=body,
            citations=contained_citations(body, observations),
            missing_data_requests=_missing_data_requests(body),
        )

    def differential_diagnosis(self, symptom_narrative: str) -> DdxResult:
        """Ten ranked diagnoses; one reparse re-prompt, then ParseError."""
        if not symptom_narrative.strip():
            raise EmptyInput("symptom narrative is empty")
        variables = {"prompt": symptom_narrative}
        response = self._complete(DDX_TEMPLATE, variables)
        ranked = _parse_ranked(response)
        if ranked is None:
            response = self._complete(DDX_RETRY_TEMPLATE, variables)
            ranked = _parse_ranked(response)
            if ranked is None:
                raise ParseError("expected 10 'Ranked N Diagnosis:' lines")
        first = _RANKED_RE.search(response)
        reasoning = response[: first.start()].strip() if first else ""
        return DdxResult(reasoning=reasoning, ranked=ranked)

    def answer_mcq(self, question: str, options: tuple[str, ...]) -> McqAnswer:
        """Answer a 4- or 5-option question; leading 'Correct: X' is parsed."""
        if len(options) not in (4, 5):
            raise ValueError("options must have 4 or 5 entries")
        letters = "ABCDE"[: len(options)]
        variables = {"question": question}
        for letter, option in zip(letters.lower(), options):
            variables[letter] = option
        template_id = MCQ5_TEMPLATE if len(options) == 5 else MCQ_TEMPLATE
        response = self._complete(template_id, variables)
        match = _MCQ_RE.match(response)
        if not match:
            raise ParseError("response does not start with 'Correct: X'")
        letter = match.group(1).upper()
        if letter not in letters:
            raise LetterOutOfRange(
                f"answer {letter!r} is outside the offered options {letters}"
            )
        rationale = response[match.end() :].strip()
        return McqAnswer(letter=letter, rationale=rationale)


def _parse_ranked(response: str) -> tuple[str, ...] | None:
    matches = _RANKED_RE.findall(response)
    if len(matches) != DDX_SIZE:
        return None
    numbers = [int(number) for number, _ in matches]
    if numbers != list(range(1, DDX_SIZE + 1)):
        return None
    entries = tuple(text.strip() for _, text in matches)
    if any(not entry for entry in entries):
        return None
    return entries
