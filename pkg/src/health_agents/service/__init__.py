"""HTTP API and CLI over the conversation engine and eval harnesses."""

from .app import ApiError, EventBus, QUEUE_BOUND, SessionManager, create_app
from .cli import main
from .config import ApiConfig, ConfigError, PersonaBundle, load_config
from .store import SessionDescriptor, SessionRecord, SessionStore

__all__ = [
    "ApiConfig",
    "ApiError",
    "ConfigError",
    "EventBus",
    "PersonaBundle",
    "QUEUE_BOUND",
    "SessionDescriptor",
    "SessionManager",
    "SessionRecord",
    "SessionStore",
    "create_app",
    "load_config",
    "main",
]
