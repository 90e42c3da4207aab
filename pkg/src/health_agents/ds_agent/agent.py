"""Data-science agent: plan, generate code, execute with repair, narrate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..data_model import (
    DataSummary,
    PersonaProfile,
    WearableTables,
    render_data_summary,
    render_table_infos,
    summarize_schema,
    tables_to_wire,
)
from ..gateway import CompletionRequest, Gateway
from ..sandbox import SandboxClient, SandboxRequest
from .code import CodeParseError, NetworkImportRejected, ScriptSource, parse_script
from .plan import AnalysisPlan, PlanParseError, parse_plan

MAX_ATTEMPTS = 5

_REPAIR_FEEDBACK = (
    "Update the code so it executes without errors while still following the"
    " original instructions. Keep the same analysis() signature and do not"
    " add comments."
)


class SandboxUnavailable(Exception):
    pass


@dataclass(frozen=True)
class ExecResult:
    status: str  # ok | error
    value: Any
    attempts_used: int
    wall_time: float = 0.0

    def __post_init__(self) -> None:
        if not 1 <= self.attempts_used <= MAX_ATTEMPTS:
            raise ValueError(f"attempts_used out of range: {self.attempts_used}")


@dataclass(frozen=True)
class DSAnswer:
    narrative: str
    plan: AnalysisPlan
    exec: ExecResult | None


def _flatten_value(value: Any) -> Any:
    """Restrict ok-results to scalars, strings, and flat lists."""
    if isinstance(value, dict):
        out: dict[str, Any] = {}
        for key, item in value.items():
            if isinstance(item, (str, int, float, bool)) or item is None:
                out[str(key)] = item
            elif isinstance(item, list) and all(
                isinstance(v, (str, int, float, bool)) or v is None for v in item
            ):
                out[str(key)] = item
            else:
                out[str(key)] = str(item)
        return out
    return value


class DataScienceAgent:
    def __init__(
        self,
        gateway: Gateway,
        sandbox: SandboxClient | None = None,
        session_id: str = "",
    ):
        self._gateway = gateway
        self._sandbox = sandbox or SandboxClient()
        self._session_id = session_id

    def _complete(self, template_id: str, variables: dict[str, str]) -> str:
        return self._gateway.complete(
            CompletionRequest(
                template_id=template_id,
                variables=variables,
                agent_tag="ds",
                session_id=self._session_id,
            )
        )

    # ------------------------------------------------------------- planning

    def generate_plan(self, query: str, summary: DataSummary | str) -> AnalysisPlan:
        """One parse-repair re-prompt, then PlanParseError."""
        if not query or not query.strip():
            raise ValueError("query must be non-empty")
        rendered = summary if isinstance(summary, str) else render_data_summary(summary)
        variables = {"data_summary": rendered, "query": query}
        response = self._complete("C.3.2-plan", variables)
        try:
            return parse_plan(response)
        except PlanParseError:
            retry = self._complete("C.3.2-plan-retry", variables)
            return parse_plan(retry)

    # ------------------------------------------------------------- codegen

    def generate_code(
        self, plan: AnalysisPlan, summary: DataSummary | str
    ) -> ScriptSource:
        if plan.unanswerable:
            raise ValueError("cannot generate code for an unanswerable plan")
        rendered = summary if isinstance(summary, str) else render_data_summary(summary)
        response = self._complete(
            "C.3.4-code",
            {
                "data_summary": rendered,
                "dfs_info": render_table_infos(),
                "approach": plan.approach_text,
            },
        )
        return parse_script(response, attempt=1)

    # ------------------------------------------------------------ execution

    def execute_with_repair(
        self,
        script: ScriptSource,
        tables: WearableTables,
        persona: PersonaProfile | None = None,
        instructions: str = "",
        max_attempts: int = MAX_ATTEMPTS,
    ) -> ExecResult:
        """Run in the sandbox; on failure, ask for fixed code and retry.

        attempts_used counts sandbox executions; repairs = attempts_used - 1.
        A repair response that fails to parse ends the loop as an error.
        """
        if not 1 <= max_attempts <= MAX_ATTEMPTS:
            raise ValueError(f"max_attempts must be in 1..{MAX_ATTEMPTS}")
        wire = tables_to_wire(tables)
        profile_rows: tuple[dict, ...] = ()
        if persona is not None:
            rows = [
                {"field": k, "value": v, "unit": ""} for k, v in persona.demographics
            ]
            rows += [
                {"field": lab.biomarker, "value": lab.value, "unit": lab.unit}
                for lab in persona.blood_panel
            ]
            rows += [
                {"field": k, "value": v, "unit": ""} for k, v in persona.conditions
            ]
            profile_rows = tuple(rows)

        current = script
        total_wall = 0.0
        for attempt in range(1, max_attempts + 1):
            try:
                response = self._sandbox.run_script(
                    SandboxRequest(
                        script=current.body, tables=wire, profile=profile_rows
                    )
                )
            except OSError as exc:
                raise SandboxUnavailable(str(exc)) from exc
            total_wall += response.wall_time
            if response.status == "ok":
                return ExecResult(
                    status="ok",
                    value=_flatten_value(response.result),
                    attempts_used=attempt,
                    wall_time=total_wall,
                )
            error = response.error or {"message": response.status, "traceback": ""}
            if attempt == max_attempts:
                return ExecResult(
                    status="error",
                    value={
                        "message": error.get("message", ""),
                        "traceback": error.get("traceback", ""),
                    },
                    attempts_used=attempt,
                    wall_time=total_wall,
                )
            repair = self._complete(
                "C.3.5-debug",
                {
                    "code_instructions": instructions,
                    "code": current.body,
                    "code_result": (
                        f"{error.get('message', '')}\n{error.get('traceback', '')}"
                    ).strip(),
                    "code_update_feedback": _REPAIR_FEEDBACK,
                },
            )
            try:
                current = parse_script(repair, attempt=attempt + 1)
            except (CodeParseError, NetworkImportRejected) as exc:
                return ExecResult(
                    status="error",
                    value={
                        "message": f"repair did not produce runnable code: {exc}",
                        "traceback": "",
                    },
                    attempts_used=attempt,
                    wall_time=total_wall,
                )
        raise AssertionError("unreachable")

    # -------------------------------------------------------------- answer

    def answer(
        self,
        query: str,
        tables: WearableTables,
        persona: PersonaProfile | None = None,
    ) -> DSAnswer:
        """Full pipeline; unanswerable plans short-circuit with no sandbox use."""
        summary = summarize_schema(tables)
        plan = self.generate_plan(query, summary)
        if plan.unanswerable:
            return DSAnswer(narrative=plan.steps[0].text, plan=plan, exec=None)
        script = self.generate_code(plan, summary)
        result = self.execute_with_repair(
            script, tables, persona=persona, instructions=plan.approach_text
        )
        narrative = self._complete(
            "ds-narrate",
            {
                "question": query,
                "approach": plan.approach_text,
                "results": _render_results(result),
            },
        )
        return DSAnswer(narrative=narrative, plan=plan, exec=result)


def _render_results(result: ExecResult) -> str:
    import json

    if result.status != "ok":
        return f"Analysis failed after {result.attempts_used} attempts: {result.value}"
    return json.dumps(result.value, ensure_ascii=False, sort_keys=True, default=str)
