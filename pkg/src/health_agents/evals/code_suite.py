"""Unit-test suites for generated analysis code.

A suite bundles a query, an analysis script, named dataframe fixtures, and
expected outputs. Each test wraps the script so the fixture frames are
rebuilt inside the sandbox and the result comes back as one JSON string,
then compares it structurally: exact for strings and integers, relative
tolerance for floats."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from ..data_model import validate_tables
from ..ds_agent import (
    ANALYSIS_SIGNATURE,
    DataScienceAgent,
    NetworkImportRejected,
    SandboxUnavailable,
    ScriptSource,
    screen_network_imports,
)

DEFAULT_TOLERANCE = 1e-9
CATEGORIES = ("data_handling", "programming", "logic", "output", "harness")

_INSUFFICIENT_PREFIX = "Insufficient data"


class SuiteError(Exception):
    """The suite definition itself is unusable."""


@dataclass(frozen=True)
class ExpectedSpec:
    kind: str  # equals | path_equals
    value: Any
    path: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("equals", "path_equals"):
            raise SuiteError(f"unknown expectation kind {self.kind!r}")
        if self.kind == "path_equals" and not self.path:
            raise SuiteError("path_equals needs a non-empty path")


@dataclass(frozen=True)
class SuiteTest:
    name: str
    input_fixture: str
    expected: ExpectedSpec
    tolerance: float = DEFAULT_TOLERANCE


@dataclass(frozen=True)
class CodeSuite:
    suite_id: str
    query: str
    function_doc: str
    script: str
    fixtures: Mapping[str, Mapping[str, Any]]
    tests: tuple[SuiteTest, ...]

    def __post_init__(self) -> None:
        if not self.tests:
            raise SuiteError("a suite needs at least one test")
        for test in self.tests:
            if test.input_fixture not in self.fixtures:
                raise SuiteError(
                    f"test {test.name}: unknown fixture {test.input_fixture!r}"
                )


@dataclass(frozen=True)
class TestOutcome:
    name: str
    passed: bool
    category: str | None = None
    detail: str = ""

    def __post_init__(self) -> None:
        if self.passed and self.category is not None:
            raise ValueError("passing tests carry no error category")
        if not self.passed and self.category not in CATEGORIES:
            raise ValueError(f"failing tests need a category, got {self.category!r}")


@dataclass(frozen=True)
class CodeSuiteResult:
    suite_id: str
    outcomes: tuple[TestOutcome, ...]

    @property
    def pass_rate(self) -> float:
        if not self.outcomes:
            return 0.0
        return sum(1 for o in self.outcomes if o.passed) / len(self.outcomes)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "suite_id": self.suite_id,
            "pass_rate": self.pass_rate,
            "tests": [
                {
                    "name": o.name,
                    "passed": o.passed,
                    "category": o.category,
                    "detail": o.detail,
                }
                for o in self.outcomes
            ],
        }

    def render_text(self) -> str:
        width = max((len(o.name) for o in self.outcomes), default=4)
        lines = [f"suite: {self.suite_id}  pass_rate: {self.pass_rate:.3f}"]
        for o in self.outcomes:
            status = "PASS" if o.passed else f"FAIL ({o.category})"
            lines.append(f"  {o.name.ljust(width)}  {status}")
        return "\n".join(lines)


# ------------------------------------------------------------- comparison


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def floats_match(expected: float, actual: float, tolerance: float) -> bool:
    """Symmetric relative comparison; NaN matches NaN."""
    if math.isnan(expected) and math.isnan(actual):
        return True
    if math.isinf(expected) or math.isinf(actual):
        return expected == actual
    return abs(expected - actual) <= tolerance * max(
        abs(expected), abs(actual), 1e-300
    )


def compare_values(
    expected: Any, actual: Any, tolerance: float = DEFAULT_TOLERANCE
) -> tuple[bool, str]:
    """Structural equality; returns (matched, first difference)."""
    if _is_number(expected) and _is_number(actual):
        if isinstance(expected, int) and isinstance(actual, int):
            ok = expected == actual
        else:
            ok = floats_match(float(expected), float(actual), tolerance)
        return ok, "" if ok else f"number mismatch: expected {expected!r}, got {actual!r}"
    if type(expected) is not type(actual):
        return False, (
            f"type mismatch: expected {type(expected).__name__},"
            f" got {type(actual).__name__}"
        )
    if isinstance(expected, dict):
        missing = set(expected) - set(actual)
        extra = set(actual) - set(expected)
        if missing or extra:
            return False, (
                f"key mismatch: missing {sorted(missing)}, extra {sorted(extra)}"
            )
        for key in expected:
            ok, why = compare_values(expected[key], actual[key], tolerance)
            if not ok:
                return False, f"[{key}] {why}"
        return True, ""
    if isinstance(expected, list):
        if len(expected) != len(actual):
            return False, f"length mismatch: {len(expected)} vs {len(actual)}"
        for position, (left, right) in enumerate(zip(expected, actual)):
            ok, why = compare_values(left, right, tolerance)
            if not ok:
                return False, f"[{position}] {why}"
        return True, ""
    ok = expected == actual
    return ok, "" if ok else f"value mismatch: expected {expected!r}, got {actual!r}"


def _walk_path(value: Any, path: Sequence[str]) -> tuple[bool, Any]:
    current = value
    for key in path:
        if not isinstance(current, dict) or key not in current:
            return False, None
        current = current[key]
    return True, current


def _categorize_mismatch(expected: Any, actual: Any, detail: str) -> str:
    for side in (expected, actual):
        if isinstance(side, str) and side.startswith(_INSUFFICIENT_PREFIX):
            return "data_handling"
    structural = ("type mismatch", "key mismatch", "length mismatch", "missing path")
    if any(marker in detail for marker in structural):
        return "output"
    return "logic"


# --------------------------------------------------------------- loading


def _suites_root():
    return resources.files("health_agents.evals") / "data" / "suites"


def _read_suite_asset(name: str) -> str:
    return (_suites_root() / name).read_text(encoding="utf-8")


def _parse_expected(raw: Mapping[str, Any]) -> ExpectedSpec:
    return ExpectedSpec(
        kind=str(raw.get("kind", "")),
        value=raw.get("value"),
        path=tuple(str(part) for part in raw.get("path", ())),
    )


def load_suite(name_or_path: str | Path) -> CodeSuite:
    """Load a suite definition; bare names resolve against the bundled
    suite directory ('sleep-activity-low-data' and so on)."""
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        payload = json.loads(path.read_text(encoding="utf-8"))
        read_asset = lambda rel: (path.parent / rel).read_text(encoding="utf-8")
    else:
        payload = json.loads(_read_suite_asset(f"{name_or_path}.json"))
        read_asset = _read_suite_asset
    script = read_asset(str(payload["script_file"]))
    fixtures = {
        name: json.loads(read_asset(str(rel)))
        for name, rel in dict(payload.get("fixture_files", {})).items()
    }
    tests = tuple(
        SuiteTest(
            name=str(raw["name"]),
            input_fixture=str(raw["input_fixture"]),
            expected=_parse_expected(raw["expected"]),
            tolerance=float(raw.get("tolerance", DEFAULT_TOLERANCE)),
        )
        for raw in payload.get("tests", ())
    )
    return CodeSuite(
        suite_id=str(payload["id"]),
        query=str(payload.get("query", "")),
        function_doc=str(payload.get("function_doc", "")),
        script=script,
        fixtures=fixtures,
        tests=tests,
    )


def bundled_suite_names() -> tuple[str, ...]:
    names = [
        entry.name[: -len(".json")]
        for entry in _suites_root().iterdir()
        if entry.name.endswith(".json")
    ]
    return tuple(sorted(names))


# --------------------------------------------------------------- running


_WRAPPER = '''

_suite_user_analysis = analysis
_SUITE_FIXTURE = {fixture_literal}


def _suite_build_frames(payload):
    import pandas as pd

    frames = {{}}
    for name in ("summary_df", "activities_df", "profile_df", "population_df"):
        spec = payload.get(name) or {{}}
        if not spec or spec.get("empty"):
            frames[name] = pd.DataFrame()
            continue
        frame = pd.DataFrame(
            {{column: list(values) for column, values in spec.get("columns", {{}}).items()}}
        )
        index = spec.get("index") or {{}}
        if index.get("kind") == "date_range":
            frame.index = pd.date_range(
                start=index["start"],
                periods=int(index["periods"]),
                freq=index.get("freq", "D"),
            )
        elif index.get("kind") == "values":
            frame.index = list(index.get("values", ()))
        frames[name] = frame
    return frames


def analysis(summary_df, activities_df, profile_df, population_df):
    import json

    frames = _suite_build_frames(_SUITE_FIXTURE)
    result = _suite_user_analysis(
        frames["summary_df"],
        frames["activities_df"],
        frames["profile_df"],
        frames["population_df"],
    )
    return json.dumps(result, default=str)
'''


def build_test_script(suite: CodeSuite, fixture_name: str) -> ScriptSource:
    """Wrap the suite script so the fixture frames are rebuilt inside the
    sandbox and the analysis result returns as one JSON string (which the
    executor passes through untouched)."""
    fixture = suite.fixtures[fixture_name]
    source = suite.script.rstrip() + _WRAPPER.format(fixture_literal=repr(fixture))
    try:
        compile(source, "<suite>", "exec")
    except SyntaxError as exc:
        raise SuiteError(f"suite script does not compile: {exc}") from exc
    screen_network_imports(source)
    return ScriptSource(function_header=ANALYSIS_SIGNATURE, body=source, attempt=1)


def _empty_tables():
    return validate_tables((), (), ())


def _is_resource_failure(message: str) -> bool:
    # sandbox resource-limit messages, not script defects
    return message == "memory cap exceeded" or (
        message.startswith("script exceeded") and message.endswith("deadline")
    )


def _run_one(
    suite: CodeSuite, test: SuiteTest, agent: DataScienceAgent
) -> TestOutcome:
    try:
        script = build_test_script(suite, test.input_fixture)
    except (SuiteError, NetworkImportRejected, SyntaxError) as exc:
        return TestOutcome(
            name=test.name, passed=False, category="harness", detail=str(exc)
        )
    try:
        result = agent.execute_with_repair(
            script, _empty_tables(), instructions=suite.function_doc
        )
    except SandboxUnavailable as exc:
        return TestOutcome(
            name=test.name, passed=False, category="harness", detail=str(exc)
        )
    if result.status != "ok":
        message = ""
        if isinstance(result.value, dict):
            message = str(result.value.get("message", ""))
        category = "harness" if _is_resource_failure(message) else "programming"
        return TestOutcome(
            name=test.name, passed=False, category=category, detail=message
        )
    if not isinstance(result.value, str):
        return TestOutcome(
            name=test.name,
            passed=False,
            category="harness",
            detail=f"expected the wrapper's JSON string, got {type(result.value)}",
        )
    try:
        actual = json.loads(result.value)
    except ValueError as exc:
        return TestOutcome(
            name=test.name, passed=False, category="harness", detail=str(exc)
        )
    expected = test.expected
    if expected.kind == "path_equals":
        found, actual_leaf = _walk_path(actual, expected.path)
        if not found:
            detail = f"missing path {'/'.join(expected.path)}"
            return TestOutcome(
                name=test.name,
                passed=False,
                category=_categorize_mismatch(expected.value, actual, detail),
                detail=detail,
            )
        actual = actual_leaf
    ok, detail = compare_values(expected.value, actual, test.tolerance)
    if ok:
        return TestOutcome(name=test.name, passed=True)
    return TestOutcome(
        name=test.name,
        passed=False,
        category=_categorize_mismatch(expected.value, actual, detail),
        detail=detail,
    )


def run_code_suite(suite: CodeSuite, agent: DataScienceAgent) -> CodeSuiteResult:
    """Execute every test of the suite through the agent's sandboxed
    execute-with-repair path and compare outputs structurally."""
    outcomes = tuple(_run_one(suite, test, agent) for test in suite.tests)
    return CodeSuiteResult(suite_id=suite.suite_id, outcomes=outcomes)
