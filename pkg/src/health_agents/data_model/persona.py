"""Sectioned persona text format: parse to PersonaProfile and render back.

Sections start with "# "; entries are "Key: value" pairs separated by ";"
or newlines, with bare continuation lines joined to the previous value.
"""

from __future__ import annotations

import re
from pathlib import Path

from .types import FormatError, LabValue, PersonaProfile

DEMOGRAPHICS = "Demographics"
BLOOD_TESTS = "Blood Tests"
CONDITIONS = "Health Disease Conditions"
USER_STORY = "User Story"
USER_GOAL = "User Goal"
GOAL_HEADER = "User Goal that they want to get advice"

_LAB = re.compile(
    r"^(?P<value>-?\d+(?:\.\d+)?)\s*\((?P<unit>[^)]*)\)"
    r"(?:\s*\[ref\s+(?P<low>-?\d+(?:\.\d+)?)-(?P<high>-?\d+(?:\.\d+)?)\])?$"
)
_NUMBER_UNIT = re.compile(r"^(-?\d+(?:\.\d+)?)(?:\s*\(([^)]*)\))?$")


def _split_sections(text: str) -> list[tuple[str, str]]:
    sections: list[tuple[str, list[str]]] = []
    for line in text.splitlines():
        if line.startswith("# "):
            sections.append((line[2:].strip(), []))
        elif sections:
            sections[-1][1].append(line)
        elif line.strip():
            raise FormatError("content before the first section header")
    if not sections:
        raise FormatError("no section headers found")
    return [(name, "\n".join(body).strip()) for name, body in sections]


def _entries(body: str) -> list[tuple[str, str]]:
    """Split a section into (key, value) entries."""
    entries: list[tuple[str, str]] = []
    for line in body.splitlines():
        for piece in line.split(";"):
            piece = piece.strip()
            if not piece:
                continue
            if ": " in piece:
                key, value = piece.rsplit(": ", 1)
                entries.append((key.strip(), value.strip()))
            elif entries:
                key, value = entries[-1]
                entries[-1] = (key, f"{value} {piece}".strip())
            else:
                raise FormatError(f"entry without a key: {piece!r}")
    return entries


def _lab_from_entry(key: str, value: str) -> LabValue:
    match = _LAB.match(value)
    if match is None:
        raise FormatError(f"blood test entry {key!r} not in 'value (unit)' form: {value!r}")
    rng = None
    if match.group("low") is not None:
        rng = (float(match.group("low")), float(match.group("high")))
    return LabValue(
        biomarker=key,
        value=float(match.group("value")),
        unit=match.group("unit"),
        reference_range=rng,
    )


def _number_with_unit(raw: str) -> tuple[float, str] | None:
    match = _NUMBER_UNIT.match(raw.strip())
    if match is None:
        return None
    return float(match.group(1)), (match.group(2) or "").strip()


def _check_bmi(demographics: tuple[tuple[str, str], ...]) -> None:
    by_key = dict(demographics)
    height = _number_with_unit(by_key.get("Height", ""))
    weight = _number_with_unit(by_key.get("Weight", ""))
    bmi = _number_with_unit(by_key.get("BMI", ""))
    if height is None or weight is None or bmi is None:
        return
    height_value, height_unit = height
    if height_unit == "cm":
        height_m = height_value / 100.0
    elif height_unit == "m":
        height_m = height_value
    else:
        return
    weight_value, weight_unit = weight
    if weight_unit != "kg" or height_m <= 0:
        return
    derived = weight_value / (height_m * height_m)
    if abs(derived - bmi[0]) > 0.5:
        raise FormatError(
            f"BMI {bmi[0]} inconsistent with height/weight (derived {derived:.1f})"
        )


def load_persona(source: str | Path) -> PersonaProfile:
    """Parse a persona document from a path or raw text."""
    if isinstance(source, Path):
        text = source.read_text()
    elif "\n" in source or source.lstrip().startswith("#"):
        text = source
    else:
        path = Path(source)
        if not path.exists():
            raise FormatError(f"no such persona file: {source}")
        text = path.read_text()

    demographics: tuple[tuple[str, str], ...] = ()
    blood_panel: list[LabValue] = []
    conditions: tuple[tuple[str, str], ...] = ()
    user_story = ""
    goal = ""
    raw_sections: list[tuple[str, str]] = []

    for name, body in _split_sections(text):
        if name == DEMOGRAPHICS:
            demographics = tuple(_entries(body))
        elif name == BLOOD_TESTS:
            blood_panel = [_lab_from_entry(k, v) for k, v in _entries(body)]
        elif name == CONDITIONS:
            conditions = tuple(_entries(body))
        elif name == USER_STORY:
            user_story = body
        elif name.startswith(USER_GOAL):
            goal = body
        else:
            raw_sections.append((name, body))

    _check_bmi(demographics)
    return PersonaProfile(
        demographics=demographics,
        blood_panel=tuple(blood_panel),
        conditions=conditions,
        user_story=user_story,
        goal=goal,
        raw_sections=tuple(raw_sections),
    )


def render_persona(profile: PersonaProfile) -> str:
    """Canonical text form; load_persona(render_persona(p)) == p."""
    blocks: list[str] = []
    if profile.demographics:
        lines = [f"{k}: {v}" for k, v in profile.demographics]
        blocks.append(f"# {DEMOGRAPHICS}\n" + "\n".join(lines))
    if profile.blood_panel:
        lines = []
        for lab in profile.blood_panel:
            entry = f"{lab.biomarker}: {lab.value} ({lab.unit})"
            if lab.reference_range is not None:
                low, high = lab.reference_range
                entry += f" [ref {low}-{high}]"
            lines.append(entry)
        blocks.append(f"# {BLOOD_TESTS}\n" + "\n".join(lines))
    if profile.conditions:
        lines = [f"{k}: {v}" for k, v in profile.conditions]
        blocks.append(f"# {CONDITIONS}\n" + "\n".join(lines))
    for name, body in profile.raw_sections:
        blocks.append(f"# {name}\n{body}")
    if profile.user_story:
        blocks.append(f"# {USER_STORY}\n{profile.user_story}")
    if profile.goal:
        blocks.append(f"# {GOAL_HEADER}\n{profile.goal}")
    return "\n\n".join(blocks) + "\n"
