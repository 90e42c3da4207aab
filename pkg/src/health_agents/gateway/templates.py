"""Prompt templates with strict placeholder substitution.

Templates are plain text files under ``gateway/assets``; the file stem is the
template id. Placeholders use ``{{name}}`` syntax. Rendering with a missing
variable is an error, never a silent blank.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Mapping

_PLACEHOLDER = re.compile(r"\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}")

# Asset ids built by concatenating other assets at load time. The progress
# block is versioned as its own file but only ever rendered appended to the
# coach prompt.
_COMPOSED = {
    "E.2.2-coach-pha": ("E.2.2-coach", "_pha-progress-block"),
}


class TemplateError(Exception):
    pass


class UnknownTemplate(TemplateError):
    pass


class MissingVariable(TemplateError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    body: str

    @property
    def required_vars(self) -> frozenset[str]:
        return frozenset(_PLACEHOLDER.findall(self.body))

    def render(self, variables: Mapping[str, object]) -> str:
        def substitute(match: re.Match[str]) -> str:
            name = match.group(1)
            if name not in variables:
                raise MissingVariable(
                    f"template {self.id!r} requires variable {name!r}"
                )
            return str(variables[name])

        return _PLACEHOLDER.sub(substitute, self.body)


class TemplateRegistry:
    def __init__(self) -> None:
        self._templates: dict[str, PromptTemplate] = {}

    def register(self, template: PromptTemplate) -> None:
        if template.id in self._templates:
            raise TemplateError(f"duplicate template id {template.id!r}")
        self._templates[template.id] = template

    def get(self, template_id: str) -> PromptTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise UnknownTemplate(f"no template registered as {template_id!r}") from None

    def render(self, template_id: str, variables: Mapping[str, object]) -> str:
        return self.get(template_id).render(variables)

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._templates))

    def __contains__(self, template_id: str) -> bool:
        return template_id in self._templates


def load_default_registry() -> TemplateRegistry:
    """Load every packaged prompt asset, including composed ids.

    Files whose stem starts with an underscore are reusable blocks, not
    standalone templates.
    """
    registry = TemplateRegistry()
    bodies: dict[str, str] = {}
    asset_root = resources.files("health_agents.gateway") / "assets"
    for entry in sorted(asset_root.iterdir(), key=lambda e: e.name):
        if not entry.name.endswith(".txt"):
            continue
        stem = entry.name[: -len(".txt")]
        bodies[stem] = entry.read_text(encoding="utf-8")
    for stem, body in bodies.items():
        if stem.startswith("_"):
            continue
        registry.register(PromptTemplate(id=stem, body=body))
    for composed_id, parts in _COMPOSED.items():
        missing = [p for p in parts if p not in bodies]
        if missing:
            raise TemplateError(f"composed template {composed_id!r} missing parts {missing}")
        body = "\n".join(bodies[p].rstrip("\n") for p in parts) + "\n"
        registry.register(PromptTemplate(id=composed_id, body=body))
    return registry
