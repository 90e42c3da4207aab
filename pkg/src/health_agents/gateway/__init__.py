from .backends import (
    Backend,
    BackendError,
    HttpBackend,
    ScriptedBackend,
    UnscriptedPrompt,
    backend_from_config,
    fingerprint,
)
from .core import AGENT_TAGS, CompletionParams, CompletionRequest, Gateway
from .ledger import CallLedger, CallRecord, UnknownTurn, turn_cost
from .templates import (
    MissingVariable,
    PromptTemplate,
    TemplateError,
    TemplateRegistry,
    UnknownTemplate,
    load_default_registry,
)

__all__ = [
    "AGENT_TAGS",
    "Backend",
    "BackendError",
    "CallLedger",
    "CallRecord",
    "CompletionParams",
    "CompletionRequest",
    "Gateway",
    "HttpBackend",
    "MissingVariable",
    "PromptTemplate",
    "ScriptedBackend",
    "TemplateError",
    "TemplateRegistry",
    "UnknownTemplate",
    "UnknownTurn",
    "UnscriptedPrompt",
    "backend_from_config",
    "fingerprint",
    "load_default_registry",
    "turn_cost",
]
