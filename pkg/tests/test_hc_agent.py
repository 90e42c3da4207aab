"""Health-coach pipeline tests: verdict parsing with conservative
defaults, fixed per-turn template order, and terminal ended sessions."""

import pytest

from health_agents.data_model import PersonaProfile
from health_agents.gateway import Gateway, ScriptedBackend
from health_agents.hc_agent import (
    CoachReply,
    CoachingContext,
    EndVerdict,
    GateVerdict,
    HealthCoachAgent,
    SessionEnded,
)

CONVO = "User: I want to sleep better.\nCoach: Tell me more."


class CapturingBackend:
    """Scripted queue that also records every rendered prompt."""

    def __init__(self, *responses):
        self.queue = list(responses)
        self.prompts = []

    def generate(self, request, prompt):
        self.prompts.append(prompt)
        return self.queue.pop(0) if self.queue else "unscripted"


def _agent(*responses, pha_mode=False):
    backend = ScriptedBackend(strict=False)
    backend.enqueue(*responses)
    gateway = Gateway(backend)
    return HealthCoachAgent(gateway, pha_mode=pha_mode), gateway


def _template_ids(gateway):
    return [record.template_id for record in gateway.ledger().records()]


class TestConclusionCheck:
    def test_finish_token(self):
        agent, _ = _agent("FINISH")
        assert agent.conclusion_check(CONVO).finish

    def test_continue_token(self):
        agent, _ = _agent("CONTINUE")
        assert not agent.conclusion_check(CONVO).finish

    def test_whitespace_trimmed(self):
        agent, _ = _agent("  FINISH \n")
        assert agent.conclusion_check(CONVO).finish

    def test_malformed_then_repair(self):
        agent, gateway = _agent("maybe", "CONTINUE")
        verdict = agent.conclusion_check(CONVO)
        assert verdict.verdict == "CONTINUE"
        assert _template_ids(gateway) == ["E.2.4-check", "E.2.4-check-retry"]

    def test_malformed_twice_defaults_continue(self):
        agent, _ = _agent("maybe", "who knows")
        assert agent.conclusion_check(CONVO).verdict == "CONTINUE"

    def test_embedded_token_is_not_exact(self):
        agent, _ = _agent("I think FINISH", "The answer is FINISH")
        assert agent.conclusion_check(CONVO).verdict == "CONTINUE"

    def test_empty_conversation_rejected_without_call(self):
        agent, gateway = _agent()
        with pytest.raises(ValueError):
            agent.conclusion_check("   ")
        assert len(gateway.ledger()) == 0


class TestRecommendationGate:
    def test_yesrec_with_space(self):
        agent, _ = _agent("The user explained why.\n[VERDICT]: YESREC")
        verdict = agent.recommendation_gate(CONVO)
        assert verdict.recommend
        assert "explained why" in verdict.reasoning

    def test_norec_without_space(self):
        agent, _ = _agent("[VERDICT]:NOREC")
        assert not agent.recommendation_gate(CONVO).recommend

    def test_malformed_then_repair(self):
        agent, gateway = _agent("hmm", "[VERDICT]: NOREC")
        verdict = agent.recommendation_gate(CONVO)
        assert verdict.verdict == "NOREC"
        assert _template_ids(gateway) == ["E.2.3-gate", "E.2.3-gate-retry"]

    def test_malformed_twice_defaults_norec(self):
        agent, _ = _agent("hmm", "still unsure")
        verdict = agent.recommendation_gate(CONVO)
        assert verdict.verdict == "NOREC"
        assert "malformed" in verdict.reasoning


class TestTurnPipeline:
    def test_continue_norec_coaches(self):
        agent, gateway = _agent(
            "CONTINUE", "[VERDICT]: NOREC", "What have you tried so far?"
        )
        reply = agent.take_turn(CONVO)
        assert reply.kind == "coach"
        assert reply.text == "What have you tried so far?"
        assert _template_ids(gateway) == [
            "E.2.4-check",
            "E.2.3-gate",
            "E.2.2-coach",
        ]
        assert not agent.ended

    def test_continue_yesrec_recommends(self):
        agent, gateway = _agent(
            "CONTINUE", "[VERDICT]: YESREC", "Try a wind-down routine at 22:00."
        )
        reply = agent.take_turn(CONVO)
        assert reply.kind == "recommend"
        assert _template_ids(gateway) == [
            "E.2.4-check",
            "E.2.3-gate",
            "E.2.3-recommend",
        ]
        assert not agent.ended

    def test_finish_summarizes_and_ends(self):
        agent, gateway = _agent("FINISH", "You set a clear plan. Good luck!")
        reply = agent.take_turn(CONVO)
        assert reply.kind == "summary"
        assert agent.ended
        assert _template_ids(gateway) == ["E.2.4-check", "E.2.4-summary"]

    def test_ended_session_is_terminal(self):
        agent, gateway = _agent("FINISH", "Bye!")
        agent.take_turn(CONVO)
        calls_after_end = len(gateway.ledger())
        with pytest.raises(SessionEnded):
            agent.take_turn(CONVO)
        assert len(gateway.ledger()) == calls_after_end

    def test_pha_mode_uses_progress_coach_template(self):
        agent, gateway = _agent("CONTINUE", "[VERDICT]: NOREC", "How is it going?")
        agent.pha_mode = True
        reply = agent.take_turn(CONVO)
        assert reply.kind == "coach"
        assert _template_ids(gateway)[-1] == "E.2.2-coach-pha"

    def test_norec_turn_never_recommends(self):
        with pytest.raises(ValueError):
            CoachReply(
                text="t",
                kind="recommend",
                end_verdict=EndVerdict("CONTINUE"),
                gate_verdict=GateVerdict("NOREC"),
            )


class TestPromptContents:
    def test_ds_insights_appear_in_rendered_prompt(self):
        backend = CapturingBackend(
            "CONTINUE", "[VERDICT]: NOREC", "Noted your step trend."
        )
        agent = HealthCoachAgent(Gateway(backend))
        agent.take_turn(CONVO, ds_insights="Average steps rose to 9000 last week.")
        assert "Average steps rose to 9000 last week." in backend.prompts[-1]

    def test_persona_goal_appears_in_rendered_prompt(self):
        backend = CapturingBackend("CONTINUE", "[VERDICT]: NOREC", "ok")
        agent = HealthCoachAgent(Gateway(backend))
        persona = PersonaProfile(goal="Run a 10k without stopping")
        agent.take_turn(CONVO, persona=persona)
        assert "Run a 10k without stopping" in backend.prompts[-1]

    def test_recommend_path_receives_insights_too(self):
        backend = CapturingBackend("CONTINUE", "[VERDICT]: YESREC", "Plan: ...")
        agent = HealthCoachAgent(Gateway(backend))
        agent.take_turn(CONVO, ds_insights="Sleep dipped below 6h on weekdays.")
        assert "Sleep dipped below 6h on weekdays." in backend.prompts[-1]


class TestCoachingContext:
    def test_keyword_extraction_fills_fields(self):
        context = CoachingContext()
        context.update("My goal is to lose weight because my doctor said so.")
        context.update("I can't train in the mornings, too busy.")
        context.update("I prefer cycling over running.")
        context.update("I tried a keto diet last year.")
        assert context.goal is not None
        assert context.motivation is not None
        assert len(context.constraints) == 1
        assert len(context.preferences) == 1
        assert len(context.prior_attempts) == 1

    def test_lists_append_only_and_deduplicated(self):
        context = CoachingContext()
        context.update("I can't do early workouts.")
        first = context.constraints
        context.update("I can't do early workouts.")
        assert context.constraints == first
        context.update("I cannot lift heavy due to injury.")
        assert context.constraints[: len(first)] == first
        assert len(context.constraints) == 2

    def test_turn_updates_context(self):
        agent, _ = _agent("CONTINUE", "[VERDICT]: NOREC", "ok")
        agent.take_turn(CONVO, user_message="I want to run a marathon.")
        assert agent.context.goal == "I want to run a marathon."
