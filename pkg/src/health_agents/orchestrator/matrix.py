"""Collaboration matrix: the versioned routing table mapping question
types to a main agent, supporting agents, and a workflow description."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

AGENTS = ("ds", "de", "hc")

_CANON_RE = re.compile(r"[^a-z0-9 ]+")


class MatrixError(Exception):
    pass


def canonicalize(text: str) -> str:
    """Lowercased, punctuation-free, whitespace-collapsed comparison key."""
    lowered = _CANON_RE.sub(" ", text.lower())
    return " ".join(lowered.split())


@dataclass(frozen=True)
class MatrixRow:
    category: str
    purpose: str
    question_type: str
    example: str
    main: str
    supporting: tuple[str, ...]
    workflow: str

    def __post_init__(self) -> None:
        if self.main not in AGENTS:
            raise MatrixError(f"bad main agent {self.main!r}")
        for agent in self.supporting:
            if agent not in AGENTS:
                raise MatrixError(f"bad supporting agent {agent!r}")
            if agent == self.main:
                raise MatrixError("main agent listed as supporting")
        if len(set(self.supporting)) != len(self.supporting):
            raise MatrixError("duplicate supporting agent")
        for name in ("category", "question_type", "example", "workflow"):
            if not getattr(self, name).strip():
                raise MatrixError(f"row field {name} is empty")


class CollaborationMatrix:
    def __init__(self, rows: tuple[MatrixRow, ...], corner_cases: tuple[str, ...]):
        if not rows:
            raise MatrixError("matrix has no rows")
        keys = [(row.category, row.question_type) for row in rows]
        if len(set(keys)) != len(keys):
            raise MatrixError("duplicate (category, question_type) row")
        if len(set(corner_cases)) != len(corner_cases):
            raise MatrixError("duplicate corner case")
        self.rows = rows
        self.corner_cases = corner_cases
        self._corner_keys = {canonicalize(case) for case in corner_cases}
        self._exact: dict[str, list[MatrixRow]] = {}
        for row in rows:
            for key in (canonicalize(row.question_type), canonicalize(row.example)):
                self._exact.setdefault(key, [])
                if row not in self._exact[key]:
                    self._exact[key].append(row)

    def is_corner_case(self, query: str) -> bool:
        return canonicalize(query) in self._corner_keys

    def match_exact(self, query: str) -> MatrixRow | None:
        """Local lookup by question type or example text; among multiple
        matches the row with the most supporting agents wins."""
        candidates = self._exact.get(canonicalize(query), [])
        if not candidates:
            return None
        return max(candidates, key=lambda row: len(row.supporting))

    def categories(self) -> tuple[str, ...]:
        seen: list[str] = []
        for row in self.rows:
            if row.category not in seen:
                seen.append(row.category)
        return tuple(seen)

    def render_examples(self) -> str:
        lines = []
        for row in self.rows:
            supporting = ";".join(row.supporting) if row.supporting else "none"
            lines.append(
                f"- [{row.category}] ({row.purpose}) Question type:"
                f" {row.question_type} | Example: {row.example} | Main agent:"
                f" {row.main} | Supporting agents: {supporting} | Workflow:"
                f" {row.workflow}"
            )
        return "\n".join(lines)

    def render_corner_cases(self) -> str:
        return "\n".join(f"- {case}" for case in self.corner_cases)


def _parse_matrix(payload: dict) -> CollaborationMatrix:
    if not isinstance(payload, dict) or "rows" not in payload:
        raise MatrixError("matrix file needs a top-level 'rows' list")
    rows = []
    for raw in payload["rows"]:
        rows.append(
            MatrixRow(
                category=raw["category"],
                purpose=raw.get("purpose", ""),
                question_type=raw["question_type"],
                example=raw["example"],
                main=raw["main"],
                supporting=tuple(raw.get("supporting", ())),
                workflow=raw["workflow"],
            )
        )
    corner_cases = tuple(payload.get("corner_cases", ()))
    return CollaborationMatrix(tuple(rows), corner_cases)


def load_matrix(path: str | Path | None = None) -> CollaborationMatrix:
    if path is not None:
        payload = json.loads(Path(path).read_text())
    else:
        source = (
            resources.files("health_agents.orchestrator")
            / "data"
            / "collaboration_matrix.json"
        )
        payload = json.loads(source.read_text())
    return _parse_matrix(payload)
