from .engine import (
    ConversationEngine,
    FAILURE_REPLY,
    FALLBACK_NOTICE,
    MODES,
    Session,
    build_phia_tools,
    render_conversation,
)
from .matrix import (
    AGENTS,
    CollaborationMatrix,
    MatrixError,
    MatrixRow,
    canonicalize,
    load_matrix,
)
from .memory import (
    MEMORY_KINDS,
    MemoryEntry,
    MemoryStore,
    VISIBLE_KINDS,
    extract_memory,
)
from .reflection import (
    MAX_ROUNDS_DEFAULT,
    ReflectionOutcome,
    ReflectionRoundRecord,
    reflect,
)
from .routing import (
    CUJ_LABELS,
    RoutingDecision,
    assign_agents,
    classify_need,
    decision_from_row,
    ensure_ds_support,
    fallback_decision,
    normalize_agent,
    rephrase,
    strip_json_fences,
)
from .trace import AgentExchange, SessionTrace, TurnTrace

__all__ = [
    "AGENTS",
    "AgentExchange",
    "CUJ_LABELS",
    "CollaborationMatrix",
    "ConversationEngine",
    "FAILURE_REPLY",
    "FALLBACK_NOTICE",
    "MAX_ROUNDS_DEFAULT",
    "MEMORY_KINDS",
    "MODES",
    "MatrixError",
    "MatrixRow",
    "MemoryEntry",
    "MemoryStore",
    "ReflectionOutcome",
    "ReflectionRoundRecord",
    "RoutingDecision",
    "Session",
    "SessionTrace",
    "TurnTrace",
    "VISIBLE_KINDS",
    "assign_agents",
    "build_phia_tools",
    "canonicalize",
    "classify_need",
    "decision_from_row",
    "ensure_ds_support",
    "extract_memory",
    "fallback_decision",
    "load_matrix",
    "normalize_agent",
    "reflect",
    "rephrase",
    "render_conversation",
    "strip_json_fences",
]
