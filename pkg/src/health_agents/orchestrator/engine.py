"""The conversational engine: classify, route, rephrase, invoke agents,
reflect, remember, reply.  Also hosts the parallel-voting and
single-agent baselines behind the same respond() call."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..data_model import PersonaProfile, WearableTables, validate_tables
from ..de_agent import DomainExpertAgent, ToolDescriptor, ToolRegistry
from ..de_agent.react import run_react
from ..de_agent.tools import FixtureTool, build_fixture_tools
from ..ds_agent import DataScienceAgent
from ..gateway import CompletionRequest, Gateway, turn_cost
from ..hc_agent import CoachReply, HealthCoachAgent, SessionEnded
from .matrix import CollaborationMatrix, load_matrix
from .memory import MemoryEntry, MemoryStore, extract_memory
from .reflection import ReflectionRoundRecord, reflect
from .routing import (
    RoutingDecision,
    assign_agents,
    classify_need,
    ensure_ds_support,
    rephrase,
)
from .trace import AgentExchange, SessionTrace, TurnTrace

MODES = ("pha", "parallel", "single")

FALLBACK_TEMPLATE = "fallback-reply"
SYNTHESIS_TEMPLATE = "F.2.6-synthesize"
PHIA_TEMPLATE = "F.2.5-phia"

FALLBACK_NOTICE = (
    "Note: this question is outside the supported health topics, so a"
    " basic assistant answered it directly."
)
FAILURE_REPLY = (
    "Sorry, something went wrong while answering this. Please try"
    " rephrasing, or ask a different question."
)


def build_phia_tools() -> ToolRegistry:
    """Fixture-mode tools for the single-agent baseline loop."""
    registry = ToolRegistry()
    registry.register(
        ToolDescriptor(
            name="tool_code",
            description="Python interpreter over the user's dataframes.",
            invoke=FixtureTool(
                name="tool_code",
                default=(
                    "Execution is unavailable in fixture mode; rely on the"
                    " described data."
                ),
            ),
        )
    )
    registry.register(
        ToolDescriptor(
            name="search",
            description="Search engine. Returns a relevant snippet.",
            invoke=FixtureTool(
                name="search",
                default="No scripted search result for this query.",
            ),
        )
    )
    return registry


def render_conversation(turns: list[tuple[str, str]]) -> str:
    return "\n".join(f"{role}: {text}" for role, text in turns)


def _empty_tables() -> WearableTables:
    return validate_tables((), (), ())


@dataclass
class Session:
    session_id: str
    mode: str
    persona: PersonaProfile | None
    persona_id: str
    tables: WearableTables
    memory: MemoryStore
    trace: SessionTrace
    ds: DataScienceAgent
    de: DomainExpertAgent
    hc: HealthCoachAgent
    conversation: list[tuple[str, str]] = field(default_factory=list)
    next_turn_id: int = 1

    @property
    def ended(self) -> bool:
        return self.hc.ended


@dataclass
class _TurnPieces:
    reply: str
    label: str = ""
    routing: RoutingDecision | None = None
    rephrased: tuple[tuple[str, str], ...] = ()
    rephrase_fallback: bool = False
    exchanges: tuple[AgentExchange, ...] = ()
    reflection_rounds: tuple[ReflectionRoundRecord, ...] = ()
    memory_entries: tuple[MemoryEntry, ...] = ()
    memory_flagged: bool = False
    notes: tuple[str, ...] = ()


class ConversationEngine:
    def __init__(
        self,
        gateway: Gateway,
        matrix: CollaborationMatrix | None = None,
        sandbox=None,
        de_tools: ToolRegistry | None = None,
        phia_tools: ToolRegistry | None = None,
        max_steps: int = 8,
        reflection_max_rounds: int = 2,
        max_workers: int = 4,
    ):
        self.gateway = gateway
        self.matrix = matrix if matrix is not None else load_matrix()
        self.sandbox = sandbox
        self.de_tools = de_tools if de_tools is not None else build_fixture_tools()
        self.phia_tools = (
            phia_tools if phia_tools is not None else build_phia_tools()
        )
        self.max_steps = max_steps
        self.reflection_max_rounds = reflection_max_rounds
        self.max_workers = max_workers

    # ------------------------------------------------------------ sessions

    def open_session(
        self,
        session_id: str,
        mode: str = "pha",
        persona: PersonaProfile | None = None,
        tables: WearableTables | None = None,
        persona_id: str = "",
    ) -> Session:
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        return Session(
            session_id=session_id,
            mode=mode,
            persona=persona,
            persona_id=persona_id,
            tables=tables if tables is not None else _empty_tables(),
            memory=MemoryStore(),
            trace=SessionTrace(session_id, mode, persona_id),
            ds=DataScienceAgent(
                self.gateway, sandbox=self.sandbox, session_id=session_id
            ),
            de=DomainExpertAgent(
                self.gateway,
                tools=self.de_tools,
                session_id=session_id,
                max_steps=self.max_steps,
            ),
            hc=HealthCoachAgent(
                self.gateway, session_id=session_id, pha_mode=(mode == "pha")
            ),
        )

    # ------------------------------------------------------------- respond

    def respond(
        self, session: Session, user_message: str, mode: str | None = None
    ) -> tuple[str, TurnTrace]:
        """One turn.  Per-stage errors become a structured failure reply in
        the trace; the caller always gets text back."""
        if session.ended:
            raise SessionEnded("session has ended")
        if not user_message.strip():
            raise ValueError("user message is empty")
        turn_mode = mode if mode is not None else session.mode
        if turn_mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {turn_mode!r}")
        session.hc.pha_mode = turn_mode == "pha"
        turn_id = session.next_turn_id
        self.gateway.begin_turn(session.session_id, turn_id)
        conversation = render_conversation(
            session.conversation + [("User", user_message)]
        )
        try:
            if turn_mode == "pha":
                pieces = self._respond_pha(
                    session, user_message, conversation, turn_id
                )
            elif turn_mode == "parallel":
                pieces = self._respond_parallel(
                    session, user_message, conversation, turn_id
                )
            else:
                pieces = self._respond_single(session, user_message)
        except SessionEnded:
            raise
        except Exception as exc:
            pieces = _TurnPieces(
                reply=FAILURE_REPLY,
                notes=(f"error: {type(exc).__name__}: {exc}",),
            )
        cost = turn_cost(self.gateway.ledger(session.session_id), turn_id)
        turn = TurnTrace(
            turn_id=turn_id,
            user_message=user_message,
            mode=turn_mode,
            reply=pieces.reply,
            label=pieces.label,
            routing=pieces.routing,
            rephrased=pieces.rephrased,
            rephrase_fallback=pieces.rephrase_fallback,
            exchanges=pieces.exchanges,
            reflection_rounds=pieces.reflection_rounds,
            memory_entries=pieces.memory_entries,
            memory_flagged=pieces.memory_flagged,
            llm_calls=int(cost["llm_calls"]),
            wall_time=float(cost["wall_time"]),
            notes=pieces.notes,
        )
        session.trace.add_turn(turn)
        session.conversation.append(("User", user_message))
        session.conversation.append(("Assistant", pieces.reply))
        session.next_turn_id += 1
        return pieces.reply, turn

    # ----------------------------------------------------------- pha mode

    def _respond_pha(
        self,
        session: Session,
        user_message: str,
        conversation: str,
        turn_id: int,
    ) -> _TurnPieces:
        sid = session.session_id
        notes: list[str] = []
        label = classify_need(
            self.gateway, user_message, conversation, session_id=sid
        )
        decision = assign_agents(
            self.gateway,
            user_message,
            topic=f"{label}: {user_message}",
            matrix=self.matrix,
            conversation=conversation,
            session_id=sid,
        )
        if label == "CUJ2":
            decision = ensure_ds_support(decision, True)
        if decision.fallback:
            text = self.gateway.complete(
                CompletionRequest(
                    template_id=FALLBACK_TEMPLATE,
                    variables={"conversation": conversation, "query": user_message},
                    agent_tag="orchestrator",
                    session_id=sid,
                )
            )
            notes.append("fallback: query outside supported health topics")
            return _TurnPieces(
                reply=f"{FALLBACK_NOTICE}\n\n{text}",
                label=label,
                routing=decision,
                notes=tuple(notes),
            )
        rephrased, used_fallback = rephrase(
            self.gateway, user_message, decision, session_id=sid
        )
        if used_fallback:
            notes.append("rephrase fell back to the original question")
        memory_block = session.memory.visible_block(before_turn=turn_id)
        insights: dict[str, list[str]] = {}
        exchanges: list[AgentExchange] = []
        for agent in decision.supporting:
            text = self._invoke_supporting(
                session, agent, rephrased[agent], conversation
            )
            insights.setdefault(agent, []).append(text)
            exchanges.append(
                AgentExchange(
                    agent=agent,
                    sub_query=rephrased[agent],
                    response=text,
                    role="supporting",
                )
            )
        main_query = rephrased[decision.main]
        main_response, coach_reply = self._invoke_main(
            session,
            decision.main,
            main_query,
            memory_block,
            insights,
            conversation,
            user_message,
        )
        exchanges.append(
            AgentExchange(
                agent=decision.main,
                sub_query=main_query,
                response=main_response,
                role="main",
            )
        )
        session_closed = coach_reply is not None and coach_reply.kind == "summary"
        if session_closed:
            rounds: tuple[ReflectionRoundRecord, ...] = ()
            notes.append("coaching session concluded")
        else:
            rounds, main_response = reflect(
                self.gateway,
                query=user_message,
                decision=decision,
                supporting_insights=insights,
                main_response=main_response,
                reinvoke=lambda agent, question: self._invoke_supporting(
                    session, agent, question, conversation
                ),
                reprompt_main=lambda updated: self._reprompt_main(
                    session,
                    decision.main,
                    main_query,
                    memory_block,
                    updated,
                    conversation,
                    coach_reply,
                ),
                session_id=sid,
                max_rounds=self.reflection_max_rounds,
            )
        entries, flagged = extract_memory(
            self.gateway,
            session.memory,
            turn_id=turn_id,
            conversation=conversation,
            user_message=user_message,
            reply=main_response,
            session_id=sid,
        )
        if flagged:
            notes.append("memory extraction failed; nothing recorded")
        return _TurnPieces(
            reply=main_response,
            label=label,
            routing=decision,
            rephrased=tuple(sorted(rephrased.items())),
            rephrase_fallback=used_fallback,
            exchanges=tuple(exchanges),
            reflection_rounds=rounds,
            memory_entries=entries,
            memory_flagged=flagged,
            notes=tuple(notes),
        )

    # ------------------------------------------------------ agent adapters

    @staticmethod
    def _render_insights(insights: dict[str, list[str]]) -> str:
        lines = [
            f"[{agent}] {text}"
            for agent, texts in insights.items()
            for text in texts
        ]
        return "\n".join(lines)

    def _main_context(
        self, memory_block: str, insights: dict[str, list[str]]
    ) -> str:
        rendered = self._render_insights(insights)
        parts = []
        if memory_block:
            parts.append(memory_block)
        if rendered:
            parts.append("Insights from supporting agents:\n" + rendered)
        return "\n\n".join(parts)

    def _invoke_supporting(
        self, session: Session, agent: str, sub_query: str, conversation: str
    ) -> str:
        if agent == "ds":
            return session.ds.answer(
                sub_query, session.tables, session.persona
            ).narrative
        if agent == "de":
            answer, _ = session.de.answer_query(
                sub_query, session.persona, session.tables
            )
            return answer.body
        return session.hc.coach_turn(conversation, session.persona)

    def _invoke_main(
        self,
        session: Session,
        agent: str,
        sub_query: str,
        memory_block: str,
        insights: dict[str, list[str]],
        conversation: str,
        user_message: str,
    ) -> tuple[str, CoachReply | None]:
        context = self._main_context(memory_block, insights)
        if agent == "ds":
            query = f"{context}\n\n{sub_query}" if context else sub_query
            return (
                session.ds.answer(query, session.tables, session.persona).narrative,
                None,
            )
        if agent == "de":
            answer, _ = session.de.answer_query(
                sub_query, session.persona, session.tables, context=context
            )
            return answer.body, None
        reply = session.hc.take_turn(
            conversation,
            user_message=user_message,
            persona=session.persona,
            ds_insights=context or None,
        )
        return reply.text, reply

    def _reprompt_main(
        self,
        session: Session,
        agent: str,
        sub_query: str,
        memory_block: str,
        insights: dict[str, list[str]],
        conversation: str,
        coach_reply: CoachReply | None,
    ) -> str:
        context = self._main_context(memory_block, insights)
        if agent == "ds":
            query = f"{context}\n\n{sub_query}" if context else sub_query
            return session.ds.answer(
                query, session.tables, session.persona
            ).narrative
        if agent == "de":
            answer, _ = session.de.answer_query(
                sub_query, session.persona, session.tables, context=context
            )
            return answer.body
        if coach_reply is not None and coach_reply.kind == "recommend":
            return session.hc.recommend(
                conversation, session.persona, ds_insights=context or None
            )
        return session.hc.coach_turn(
            conversation, session.persona, ds_insights=context or None
        )

    # ------------------------------------------------------- parallel mode

    def _respond_parallel(
        self,
        session: Session,
        user_message: str,
        conversation: str,
        turn_id: int,
    ) -> _TurnPieces:
        sid = session.session_id

        def run_ds() -> str:
            return session.ds.answer(
                user_message, session.tables, session.persona
            ).narrative

        def run_de() -> str:
            answer, _ = session.de.answer_query(
                user_message, session.persona, session.tables
            )
            return answer.body

        def run_hc() -> str:
            return session.hc.take_turn(
                conversation, user_message=user_message, persona=session.persona
            ).text

        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            futures = [pool.submit(run_ds), pool.submit(run_de), pool.submit(run_hc)]
            ds_text, de_text, hc_text = [future.result() for future in futures]
        reply = self.gateway.complete(
            CompletionRequest(
                template_id=SYNTHESIS_TEMPLATE,
                variables={
                    "ds_insights": ds_text,
                    "de_insights": de_text,
                    "hc_insights": hc_text,
                    "conversation": conversation,
                },
                agent_tag="orchestrator",
                session_id=sid,
            )
        )
        exchanges = (
            AgentExchange(
                agent="ds", sub_query=user_message, response=ds_text,
                role="supporting",
            ),
            AgentExchange(
                agent="de", sub_query=user_message, response=de_text,
                role="supporting",
            ),
            AgentExchange(
                agent="hc", sub_query=user_message, response=hc_text,
                role="supporting",
            ),
            AgentExchange(
                agent="orchestrator",
                sub_query=user_message,
                response=reply,
                role="synthesis",
            ),
        )
        return _TurnPieces(reply=reply, exchanges=exchanges)

    # --------------------------------------------------------- single mode

    def _respond_single(self, session: Session, user_message: str) -> _TurnPieces:
        trace = run_react(
            self.gateway,
            user_message,
            self.phia_tools,
            agent_tag="baseline",
            session_id=session.session_id,
            context_block="",
            max_steps=self.max_steps,
            template_id=PHIA_TEMPLATE,
            tools_block="",
            finish_tools=("finish",),
        )
        exchange = AgentExchange(
            agent="baseline",
            sub_query=user_message,
            response=trace.final,
            role="main",
        )
        return _TurnPieces(reply=trace.final, exchanges=(exchange,))
