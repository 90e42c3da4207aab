"""Reason-act loop: thought, tool action, observation, until finish.

Action syntax is a single bracket-tagged line, `[Act]: tool(input)`.  A
malformed step gets one repair re-prompt; a tool that throws becomes an
error observation and the loop continues; hitting the step budget forces
a final answer prompt.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..gateway import CompletionRequest, Gateway
from .tools import ToolError, ToolRegistry

REACT_TEMPLATE = "D.2.1-react"
MAX_STEPS_DEFAULT = 8

_FINISH_RE = re.compile(r"\[Finish\]:\s*(.*)\Z", re.DOTALL)
_ACT_RE = re.compile(r"\[Act\]:\s*([A-Za-z_][\w-]*)\((.*)\)", re.DOTALL)
_THOUGHT_RE = re.compile(r"\[Thought\]:\s*(.*?)(?=\n\[|\Z)", re.DOTALL)

_REPAIR_NOTE = (
    "Your last step was malformed. Reply with exactly one"
    " '[Thought]: ...' line followed by one '[Act]: tool(input)' line,"
    " or finish with '[Finish]: your answer'."
)


class ForcedFinishEmpty(Exception):
    pass


@dataclass(frozen=True)
class ReActAction:
    tool: str
    input: str


@dataclass(frozen=True)
class ReActStep:
    thought: str
    action: ReActAction | None = None
    observation: str | None = None


@dataclass(frozen=True)
class ReActTrace:
    steps: tuple[ReActStep, ...] = ()
    finished: bool = False
    final: str = ""

    def __post_init__(self) -> None:
        if self.finished and not self.final.strip():
            raise ValueError("finished trace needs a final answer")
        for step in self.steps:
            if step.action is not None and step.observation is None:
                raise ValueError("every action needs an observation")

    def observations(self) -> tuple[str, ...]:
        return tuple(
            step.observation for step in self.steps if step.observation is not None
        )


@dataclass
class _Parsed:
    thought: str = ""
    action: ReActAction | None = None
    final: str | None = None
    malformed: bool = False


def _strip_quotes(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in ("'", '"'):
        return text[1:-1].strip()
    return text


def _parse_step(response: str, finish_tools: tuple[str, ...] = ()) -> _Parsed:
    finish = _FINISH_RE.search(response)
    thought_match = _THOUGHT_RE.search(response)
    thought = thought_match.group(1).strip() if thought_match else ""
    if finish:
        final = finish.group(1).strip()
        if not final:
            return _Parsed(thought=thought, malformed=True)
        return _Parsed(thought=thought, final=final)
    act = _ACT_RE.search(response)
    if not act:
        return _Parsed(thought=thought, malformed=True)
    if act.group(1) in finish_tools:
        final = _strip_quotes(act.group(2))
        if not final:
            return _Parsed(thought=thought, malformed=True)
        return _Parsed(thought=thought, final=final)
    return _Parsed(
        thought=thought,
        action=ReActAction(tool=act.group(1), input=act.group(2).strip()),
    )


def render_trace(steps: tuple[ReActStep, ...]) -> str:
    lines: list[str] = []
    for step in steps:
        if step.thought:
            lines.append(f"[Thought]: {step.thought}")
        if step.action is not None:
            lines.append(f"[Act]: {step.action.tool}({step.action.input})")
        if step.observation is not None:
            lines.append(f"[Observe]: {step.observation}")
    return "\n".join(lines)


def run_react(
    gateway: Gateway,
    question: str,
    tools: ToolRegistry,
    *,
    agent_tag: str = "de",
    session_id: str = "",
    context_block: str = "",
    max_steps: int = MAX_STEPS_DEFAULT,
    template_id: str = REACT_TEMPLATE,
    tools_block: str | None = None,
    finish_tools: tuple[str, ...] = (),
) -> ReActTrace:
    """Run the loop; returns a finished trace or raises ForcedFinishEmpty.

    A tool name listed in finish_tools acts as a finish call: its input is
    the final answer ('finish(answer)' styles of prompt).
    """
    if len(tools) == 0:
        raise ValueError("tool registry is empty")
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")

    rendered_tools = tools.render_block() if tools_block is None else tools_block

    def complete(trace_text: str, finish_tail: str) -> str:
        return gateway.complete(
            CompletionRequest(
                template_id=template_id,
                variables={
                    "tools_block": rendered_tools,
                    "context_block": context_block,
                    "question": question,
                    "trace": trace_text,
                    "finish_tail": finish_tail,
                },
                agent_tag=agent_tag,
                session_id=session_id,
            )
        )

    steps: list[ReActStep] = []
    repaired = False
    while len(steps) < max_steps:
        response = complete(render_trace(tuple(steps)), "")
        parsed = _parse_step(response, finish_tools)
        if parsed.malformed:
            if repaired:
                break
            repaired = True
            response = complete(
                render_trace(tuple(steps)) + f"\n[Observe]: {_REPAIR_NOTE}", ""
            )
            parsed = _parse_step(response, finish_tools)
            if parsed.malformed:
                break
        if parsed.final is not None:
            steps.append(ReActStep(thought=parsed.thought))
            return ReActTrace(steps=tuple(steps), finished=True, final=parsed.final)
        assert parsed.action is not None
        try:
            tool = tools.get(parsed.action.tool)
            observation = tool.invoke(parsed.action.input)
        except ToolError as exc:
            observation = f"Tool error: {exc}"
        except Exception as exc:
            observation = f"Tool error: {type(exc).__name__}: {exc}"
        steps.append(
            ReActStep(
                thought=parsed.thought,
                action=parsed.action,
                observation=observation,
            )
        )

    final = complete(render_trace(tuple(steps)), "[Finish]: ").strip()
    final = _FINISH_RE.sub(lambda m: m.group(1), final).strip()
    if final.startswith("[Finish]:"):
        final = final[len("[Finish]:") :].strip()
    if not final:
        raise ForcedFinishEmpty("forced finish produced no answer")
    steps.append(ReActStep(thought="(step budget reached; answer forced)"))
    return ReActTrace(steps=tuple(steps), finished=True, final=final)
