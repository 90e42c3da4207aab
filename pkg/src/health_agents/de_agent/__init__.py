from .agent import (
    Citation,
    DDX_SIZE,
    DEAnswer,
    DdxResult,
    DomainExpertAgent,
    EmptyInput,
    LetterOutOfRange,
    McqAnswer,
    ParseError,
    SUMMARY_SECTIONS,
    TemplateViolation,
    check_summary_sections,
    contained_citations,
    extract_urls,
)
from .react import (
    ForcedFinishEmpty,
    MAX_STEPS_DEFAULT,
    ReActAction,
    ReActStep,
    ReActTrace,
    render_trace,
    run_react,
)
from .tools import (
    FixtureTool,
    ToolDescriptor,
    ToolError,
    ToolRegistry,
    build_fixture_tools,
    tool_from_config,
)

__all__ = [
    "Citation",
    "DDX_SIZE",
    "DEAnswer",
    "DdxResult",
    "DomainExpertAgent",
    "EmptyInput",
    "FixtureTool",
    "ForcedFinishEmpty",
    "LetterOutOfRange",
    "MAX_STEPS_DEFAULT",
    "McqAnswer",
    "ParseError",
    "ReActAction",
    "ReActStep",
    "ReActTrace",
    "SUMMARY_SECTIONS",
    "TemplateViolation",
    "ToolDescriptor",
    "ToolError",
    "ToolRegistry",
    "build_fixture_tools",
    "check_summary_sections",
    "contained_citations",
    "extract_urls",
    "render_trace",
    "run_react",
    "tool_from_config",
]
