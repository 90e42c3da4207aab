"""Two-stage analysis pipeline: plan, code, sandboxed execution, narration."""

from .agent import (
    MAX_ATTEMPTS,
    DataScienceAgent,
    DSAnswer,
    ExecResult,
    SandboxUnavailable,
)
from .code import (
    ANALYSIS_SIGNATURE,
    CODE_PRELUDE,
    CodeParseError,
    NETWORK_MODULES,
    NetworkImportRejected,
    ScriptSource,
    parse_script,
    screen_network_imports,
)
from .plan import (
    APPROACH_MARKER,
    DISCUSSION_MARKER,
    STEP_KINDS,
    AnalysisPlan,
    PlanParseError,
    PlanStep,
    classify_step,
    parse_plan,
)

__all__ = [
    "ANALYSIS_SIGNATURE",
    "APPROACH_MARKER",
    "AnalysisPlan",
    "CODE_PRELUDE",
    "CodeParseError",
    "DISCUSSION_MARKER",
    "DSAnswer",
    "DataScienceAgent",
    "ExecResult",
    "MAX_ATTEMPTS",
    "NETWORK_MODULES",
    "NetworkImportRejected",
    "PlanParseError",
    "PlanStep",
    "STEP_KINDS",
    "SandboxUnavailable",
    "ScriptSource",
    "classify_step",
    "parse_plan",
    "parse_script",
    "screen_network_imports",
]
