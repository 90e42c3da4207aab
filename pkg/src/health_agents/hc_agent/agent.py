"""Health-coach agent: a fixed per-turn pipeline of conclusion check,
recommendation gate, then exactly one of coaching question,
recommendation, or closing summary.

Malformed verdicts are repaired once and then defaulted conservatively
(CONTINUE, NOREC): when in doubt the coach keeps gathering context
rather than recommending early.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..data_model import PersonaProfile
from ..gateway import CompletionRequest, Gateway

CHECK_TEMPLATE = "E.2.4-check"
CHECK_RETRY_TEMPLATE = "E.2.4-check-retry"
GATE_TEMPLATE = "E.2.3-gate"
GATE_RETRY_TEMPLATE = "E.2.3-gate-retry"
COACH_TEMPLATE = "E.2.2-coach"
COACH_PHA_TEMPLATE = "E.2.2-coach-pha"
RECOMMEND_TEMPLATE = "E.2.3-recommend"
SUMMARY_TEMPLATE = "E.2.4-summary"

_VERDICT_RE = re.compile(r"\[VERDICT\]:\s*(YESREC|NOREC)")

_CONTEXT_KEYWORDS = {
    "goal": ("goal", "want to", "aiming", "aim to", "hope to", "target"),
    "motivation": ("because", "so that", "so i can", "matters to me"),
    "constraints": (
        "can't",
        "cannot",
        "no time",
        "busy",
        "injury",
        "injured",
        "not able",
        "limited",
    ),
    "preferences": ("prefer", "like to", "enjoy", "hate", "rather", "favorite"),
    "prior_attempts": ("tried", "used to", "attempted", "in the past", "before"),
}


class SessionEnded(Exception):
    pass


@dataclass
class CoachingContext:
    """Best-effort keyword telemetry; never drives the gate decision."""

    goal: str | None = None
    motivation: str | None = None
    constraints: tuple[str, ...] = ()
    preferences: tuple[str, ...] = ()
    prior_attempts: tuple[str, ...] = ()

    def update(self, user_message: str) -> None:
        lowered = user_message.lower()
        for kind, keywords in _CONTEXT_KEYWORDS.items():
            if not any(keyword in lowered for keyword in keywords):
                continue
            if kind == "goal":
                if self.goal is None:
                    self.goal = user_message
            elif kind == "motivation":
                if self.motivation is None:
                    self.motivation = user_message
            else:
                current: tuple[str, ...] = getattr(self, kind)
                if user_message not in current:
                    setattr(self, kind, current + (user_message,))


@dataclass(frozen=True)
class EndVerdict:
    verdict: str

    def __post_init__(self) -> None:
        if self.verdict not in ("FINISH", "CONTINUE"):
            raise ValueError(f"bad end verdict {self.verdict!r}")

    @property
    def finish(self) -> bool:
        return self.verdict == "FINISH"


@dataclass(frozen=True)
class GateVerdict:
    verdict: str
    reasoning: str = ""

    def __post_init__(self) -> None:
        if self.verdict not in ("YESREC", "NOREC"):
            raise ValueError(f"bad gate verdict {self.verdict!r}")

    @property
    def recommend(self) -> bool:
        return self.verdict == "YESREC"


@dataclass(frozen=True)
class CoachReply:
    text: str
    kind: str
    end_verdict: EndVerdict
    gate_verdict: GateVerdict | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("coach", "recommend", "summary"):
            raise ValueError(f"bad reply kind {self.kind!r}")
        if self.kind == "recommend":
            if self.gate_verdict is None or not self.gate_verdict.recommend:
                raise ValueError("recommendation without a YESREC gate verdict")


def _insights_block(
    persona: PersonaProfile | None, ds_insights: str | None
) -> str:
    parts = []
    if persona is not None and persona.goal:
        parts.append(f"User goal: {persona.goal}")
    if ds_insights:
        parts.append(ds_insights)
    return "\n".join(parts)


class HealthCoachAgent:
    def __init__(
        self,
        gateway: Gateway,
        session_id: str = "",
        pha_mode: bool = False,
    ):
        self.gateway = gateway
        self.session_id = session_id
        self.pha_mode = pha_mode
        self.context = CoachingContext()
        self.ended = False

    def _complete(self, template_id: str, variables: dict[str, str]) -> str:
        return self.gateway.complete(
            CompletionRequest(
                template_id=template_id,
                variables=variables,
                agent_tag="hc",
                session_id=self.session_id,
            )
        )

    def conclusion_check(self, conversation: str) -> EndVerdict:
        """FINISH or CONTINUE; one repair re-prompt, then default CONTINUE."""
        if not conversation.strip():
            raise ValueError("conversation is empty")
        variables = {"conversation": conversation}
        response = self._complete(CHECK_TEMPLATE, variables).strip()
        if response in ("FINISH", "CONTINUE"):
            return EndVerdict(response)
        response = self._complete(CHECK_RETRY_TEMPLATE, variables).strip()
        if response in ("FINISH", "CONTINUE"):
            return EndVerdict(response)
        return EndVerdict("CONTINUE")

    def recommendation_gate(self, conversation: str) -> GateVerdict:
        """YESREC/NOREC from the '[VERDICT]:' line; defaults to NOREC."""
        variables = {"conversation": conversation}
        response = self._complete(GATE_TEMPLATE, variables)
        match = _VERDICT_RE.search(response)
        if match is None:
            response = self._complete(GATE_RETRY_TEMPLATE, variables)
            match = _VERDICT_RE.search(response)
            if match is None:
                return GateVerdict(
                    "NOREC", reasoning="defaulted after malformed verdict"
                )
        reasoning = _VERDICT_RE.sub("", response).strip()
        return GateVerdict(match.group(1), reasoning=reasoning)

    def coach_turn(
        self,
        conversation: str,
        persona: PersonaProfile | None = None,
        ds_insights: str | None = None,
    ) -> str:
        template_id = COACH_PHA_TEMPLATE if self.pha_mode else COACH_TEMPLATE
        return self._complete(
            template_id,
            {
                "conversation": conversation,
                "ds_insights_block": _insights_block(persona, ds_insights),
            },
        )

    def recommend(
        self,
        conversation: str,
        persona: PersonaProfile | None = None,
        ds_insights: str | None = None,
    ) -> str:
        return self._complete(
            RECOMMEND_TEMPLATE,
            {
                "conversation": conversation,
                "ds_insights_block": _insights_block(persona, ds_insights),
            },
        )

    def closing_summary(self, conversation: str) -> str:
        return self._complete(SUMMARY_TEMPLATE, {"conversation": conversation})

    def take_turn(
        self,
        conversation: str,
        user_message: str = "",
        persona: PersonaProfile | None = None,
        ds_insights: str | None = None,
    ) -> CoachReply:
        """One coaching turn; ended sessions are terminal."""
        if self.ended:
            raise SessionEnded("coaching session already ended")
        if user_message:
            self.context.update(user_message)
        end_verdict = self.conclusion_check(conversation)
        if end_verdict.finish:
            text = self.closing_summary(conversation)
            self.ended = True
            return CoachReply(text=text, kind="summary", end_verdict=end_verdict)
        gate_verdict = self.recommendation_gate(conversation)
        if gate_verdict.recommend:
            text = self.recommend(conversation, persona, ds_insights)
            kind = "recommend"
        else:
            text = self.coach_turn(conversation, persona, ds_insights)
            kind = "coach"
        return CoachReply(
            text=text,
            kind=kind,
            end_verdict=end_verdict,
            gate_verdict=gate_verdict,
        )
