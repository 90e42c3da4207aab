from .agent import (
    CoachReply,
    CoachingContext,
    EndVerdict,
    GateVerdict,
    HealthCoachAgent,
    SessionEnded,
)

__all__ = [
    "CoachReply",
    "CoachingContext",
    "EndVerdict",
    "GateVerdict",
    "HealthCoachAgent",
    "SessionEnded",
]
