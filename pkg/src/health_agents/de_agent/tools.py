"""Tool registry for the domain-expert loop, with offline fixture mode.

Live endpoints are credentials-gated, so every shipped tool has a fixture
mode keyed by exact query text or its sha256 hex digest.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping


class ToolError(Exception):
    pass


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    description: str
    invoke: Callable[[str], str]
    example: str | None = None


class ToolRegistry:
    def __init__(self, tools: tuple[ToolDescriptor, ...] = ()):
        self._tools: dict[str, ToolDescriptor] = {}
        for tool in tools:
            self.register(tool)

    def register(self, tool: ToolDescriptor) -> None:
        if tool.name in self._tools:
            raise ValueError(f"duplicate tool name {tool.name!r}")
        self._tools[tool.name] = tool

    def get(self, name: str) -> ToolDescriptor:
        if name not in self._tools:
            raise ToolError(f"unknown tool {name!r}")
        return self._tools[name]

    def names(self) -> tuple[str, ...]:
        return tuple(self._tools)

    def __len__(self) -> int:
        return len(self._tools)

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def render_block(self) -> str:
        lines = []
        for tool in self._tools.values():
            line = f"- {tool.name}: {tool.description}"
            if tool.example:
                line += f" Example: {tool.example}"
            lines.append(line)
        return "\n".join(lines)


@dataclass
class FixtureTool:
    """Canned observations keyed by exact query or sha256(query)."""

    name: str
    mapping: Mapping[str, str] = field(default_factory=dict)
    default: str = ""

    def __call__(self, query: str) -> str:
        if query in self.mapping:
            return self.mapping[query]
        digest = hashlib.sha256(query.encode("utf-8")).hexdigest()
        if digest in self.mapping:
            return self.mapping[digest]
        if self.default:
            return self.default
        return f"No results found for: {query}"


def _http_invoke(endpoint: str, timeout: float = 20.0) -> Callable[[str], str]:
    def invoke(query: str) -> str:
        import urllib.error
        import urllib.request

        body = json.dumps({"query": query}).encode("utf-8")
        request = urllib.request.Request(
            endpoint, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except (urllib.error.URLError, ValueError) as exc:
            raise ToolError(f"tool endpoint failed: {exc}") from exc
        observation = payload.get("observation")
        if not isinstance(observation, str):
            raise ToolError("tool endpoint returned no observation text")
        return observation

    return invoke


_DESCRIPTIONS = {
    "search": (
        "Search engine. Returns a relevant snippet or answer to query."
    ),
    "literature": (
        "Biomedical literature lookup. Returns study findings relevant to the"
        " query with source links."
    ),
    "population_stats": (
        "Population statistics lookup. Returns percentile and reference-range"
        " context for a metric, age group, and gender."
    ),
    "analysis": (
        "Personal data analysis. Returns computed results over the user's"
        " wearable tables for the described question."
    ),
}

_DEFAULT_FIXTURES = {
    "search": (
        "General guidance from https://www.cdc.gov/physicalactivity/basics/"
        " recommends at least 150 minutes of moderate activity per week for"
        " adults."
    ),
    "literature": (
        "A 2020 review (https://pubmed.ncbi.nlm.nih.gov/32101536/) links"
        " consistent sleep schedules with improved heart rate variability."
    ),
    "population_stats": (
        "For the requested stratum the 50th percentile resting heart rate is"
        " 65 bpm and the 75th percentile is 71 bpm."
    ),
    "analysis": (
        "Personal data analysis is unavailable in fixture mode; rely on the"
        " supplied data summary."
    ),
}


def tool_from_config(config: Mapping[str, object]) -> ToolDescriptor:
    """Build one tool from {name, kind: fixture|http, endpoint, fixture-dir}."""
    name = config.get("name")
    if not isinstance(name, str) or not name:
        raise ValueError("tool config needs a name")
    kind = config.get("kind", "fixture")
    description = str(config.get("description") or _DESCRIPTIONS.get(name, name))
    if kind == "fixture":
        mapping: dict[str, str] = {}
        fixture_dir = config.get("fixture-dir")
        if isinstance(fixture_dir, (str, Path)):
            path = Path(fixture_dir) / f"{name}.json"
            if path.exists():
                mapping = json.loads(path.read_text())
        invoke = FixtureTool(
            name=name, mapping=mapping, default=_DEFAULT_FIXTURES.get(name, "")
        )
        return ToolDescriptor(name=name, description=description, invoke=invoke)
    if kind == "http":
        endpoint = config.get("endpoint")
        if not isinstance(endpoint, str):
            raise ValueError("http tool config needs an endpoint")
        return ToolDescriptor(
            name=name, description=description, invoke=_http_invoke(endpoint)
        )
    raise ValueError(f"unknown tool kind {kind!r}")


def build_fixture_tools(
    fixture_dir: str | Path | None = None,
    overrides: Mapping[str, Mapping[str, str]] | None = None,
) -> ToolRegistry:
    """The four shipped tools in offline fixture mode."""
    registry = ToolRegistry()
    for name in ("search", "literature", "population_stats", "analysis"):
        mapping: dict[str, str] = {}
        if fixture_dir is not None:
            path = Path(fixture_dir) / f"{name}.json"
            if path.exists():
                mapping = json.loads(path.read_text())
        if overrides and name in overrides:
            mapping = {**mapping, **overrides[name]}
        registry.register(
            ToolDescriptor(
                name=name,
                description=_DESCRIPTIONS[name],
                invoke=FixtureTool(
                    name=name, mapping=mapping, default=_DEFAULT_FIXTURES[name]
                ),
            )
        )
    return registry
