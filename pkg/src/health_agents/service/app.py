"""HTTP boundary for the conversation engine.

Endpoints (JSON bodies, UTF-8):
  POST /sessions {mode, persona_id}        -> SessionDescriptor (201)
  POST /sessions/{id}/messages {text}      -> {reply, turn_id}
  GET  /sessions                           -> [SessionDescriptor]
  GET  /sessions/{id}/trace                -> SessionTrace JSON
  GET  /sessions/{id}/events               -> server-sent turn lifecycle
  GET  /personas                           -> persona summaries
  GET  /healthz                            -> {"status": "ok"}

Every 4xx/5xx body is {code, message}. GETs never mutate state. Message
handling is serialized per session with a FIFO queue bounded at 4
waiters; a request beyond the bound gets 409 {"code": "busy"}. Turn
lifecycle events (turn_started, agent_invoked, reflection_round,
turn_completed) are buffered per session; intra-turn events are
published in trace order when the turn completes, since the engine
runs a turn as one synchronous call.  The event stream replays the
buffer from the `after` cursor and then follows live events; clients
that cannot hold a connection open poll with `max_events`."""

from __future__ import annotations

import datetime as dt
import json
import threading
import uuid
from dataclasses import dataclass, field
from typing import Iterator

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from starlette.concurrency import run_in_threadpool

from ..gateway import Backend, Gateway
from ..hc_agent import SessionEnded
from ..orchestrator import ConversationEngine
from ..orchestrator.engine import MODES, Session
from .config import ApiConfig, PersonaBundle
from .store import SessionDescriptor, SessionRecord, SessionStore

QUEUE_BOUND = 4
_EVENT_POLL_SECONDS = 0.25


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class EventBus:
    """Per-session ordered event buffer; streams replay from any index."""

    events: list[dict] = field(default_factory=list)
    condition: threading.Condition = field(default_factory=threading.Condition)

    def publish(self, event_type: str, payload: dict) -> None:
        with self.condition:
            self.events.append({"event": event_type, "data": payload})
            self.condition.notify_all()

    def snapshot(self, after: int) -> list[dict]:
        with self.condition:
            return list(self.events[after:])

    def wait_for_more(self, known: int, timeout: float) -> None:
        with self.condition:
            if len(self.events) <= known:
                self.condition.wait(timeout)


@dataclass
class SessionSlot:
    session: Session
    created_at: str
    turn_lock: threading.Lock = field(default_factory=threading.Lock)
    waiters: int = 0
    waiters_lock: threading.Lock = field(default_factory=threading.Lock)
    bus: EventBus = field(default_factory=EventBus)

    def descriptor(self) -> SessionDescriptor:
        return SessionDescriptor(
            session_id=self.session.session_id,
            mode=self.session.mode,
            persona_id=self.session.persona_id,
            created_at=self.created_at,
            status="ended" if self.session.ended else "open",
        )


class SessionManager:
    """Owns the engine, persona catalog, live sessions, and the store."""

    def __init__(
        self,
        engine: ConversationEngine,
        personas: dict[str, PersonaBundle],
        store: SessionStore | None = None,
    ):
        self.engine = engine
        self.personas = personas
        self.store = store
        self.slots: dict[str, SessionSlot] = {}
        self._slots_lock = threading.Lock()
        if store is not None:
            for record in store.load_all():
                self._restore(record)

    # ------------------------------------------------------------ restore

    def _build_session(self, record: SessionRecord) -> Session:
        descriptor = record.descriptor
        bundle = self.personas.get(descriptor.persona_id)
        session = self.engine.open_session(
            session_id=descriptor.session_id,
            mode=descriptor.mode,
            persona=bundle.profile if bundle else None,
            tables=bundle.tables if bundle else None,
            persona_id=descriptor.persona_id,
        )
        session.conversation = [tuple(pair) for pair in record.conversation]
        session.next_turn_id = record.next_turn_id
        session.memory = record.restore_memory()
        session.trace = record.restore_trace()
        session.hc.ended = descriptor.status == "ended"
        return session

    def _restore(self, record: SessionRecord) -> None:
        self.slots[record.descriptor.session_id] = SessionSlot(
            session=self._build_session(record),
            created_at=record.descriptor.created_at,
        )

    # ------------------------------------------------------------- create

    def create_session(self, mode: str, persona_id: str) -> SessionDescriptor:
        if mode not in MODES:
            raise ApiError(400, "validation", f"mode must be one of {MODES}")
        bundle = None
        if persona_id:
            bundle = self.personas.get(persona_id)
            if bundle is None:
                raise ApiError(404, "unknown_persona", f"no persona {persona_id!r}")
        session_id = uuid.uuid4().hex[:12]
        created_at = dt.datetime.now(dt.timezone.utc).isoformat()
        session = self.engine.open_session(
            session_id=session_id,
            mode=mode,
            persona=bundle.profile if bundle else None,
            tables=bundle.tables if bundle else None,
            persona_id=persona_id,
        )
        slot = SessionSlot(session=session, created_at=created_at)
        with self._slots_lock:
            self.slots[session_id] = slot
        self._persist(slot)
        return slot.descriptor()

    # ------------------------------------------------------------ lookups

    def slot(self, session_id: str) -> SessionSlot:
        found = self.slots.get(session_id)
        if found is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return found

    def descriptors(self) -> list[SessionDescriptor]:
        with self._slots_lock:
            slots = sorted(self.slots.values(), key=lambda s: s.created_at)
        return [slot.descriptor() for slot in slots]

    def persona_summaries(self) -> list[dict]:
        summaries = []
        for persona_id in sorted(self.personas):
            bundle = self.personas[persona_id]
            profile = bundle.profile
            summaries.append(
                {
                    "id": persona_id,
                    "demographics": [list(pair) for pair in profile.demographics],
                    "conditions": [list(pair) for pair in profile.conditions],
                    "goal": profile.goal,
                    "has_tables": bundle.tables is not None,
                }
            )
        return summaries

    # ------------------------------------------------------------ message

    def handle_message(self, session_id: str, text: str) -> dict:
        slot = self.slot(session_id)
        if slot.session.ended:
            raise ApiError(409, "session_ended", "session has ended")
        if not text.strip():
            raise ApiError(400, "validation", "text must be non-empty")
        with slot.waiters_lock:
            if slot.waiters >= QUEUE_BOUND:
                raise ApiError(
                    409, "busy", f"session queue full ({QUEUE_BOUND} waiting)"
                )
            slot.waiters += 1
        try:
            with slot.turn_lock:
                return self._run_turn(slot, text)
        finally:
            with slot.waiters_lock:
                slot.waiters -= 1

    def _run_turn(self, slot: SessionSlot, text: str) -> dict:
        session = slot.session
        if session.ended:
            raise ApiError(409, "session_ended", "session has ended")
        turn_id = session.next_turn_id
        slot.bus.publish(
            "turn_started",
            {"turn_id": turn_id, "mode": session.mode, "text": text},
        )
        try:
            reply, turn = self.engine.respond(session, text)
        except SessionEnded:
            raise ApiError(409, "session_ended", "session has ended")
        except ValueError as exc:
            raise ApiError(400, "validation", str(exc))
        for exchange in turn.exchanges:
            slot.bus.publish(
                "agent_invoked",
                {
                    "turn_id": turn.turn_id,
                    "agent": exchange.agent,
                    "role": exchange.role,
                    "sub_query": exchange.sub_query,
                },
            )
        for round_index, record in enumerate(turn.reflection_rounds, start=1):
            slot.bus.publish(
                "reflection_round",
                {
                    "turn_id": turn.turn_id,
                    "round": round_index,
                    "decision": record.outcome.decision,
                },
            )
        self._persist(slot)
        slot.bus.publish(
            "turn_completed",
            {
                "turn_id": turn.turn_id,
                "reply": reply,
                "llm_calls": turn.llm_calls,
                "wall_time": turn.wall_time,
                "status": "ended" if session.ended else "open",
            },
        )
        return {"reply": reply, "turn_id": turn.turn_id}

    # ------------------------------------------------------------ persist

    def _record(self, slot: SessionSlot) -> SessionRecord:
        session = slot.session
        return SessionRecord(
            descriptor=slot.descriptor(),
            conversation=tuple(tuple(pair) for pair in session.conversation),
            memory_rows=tuple(session.memory.to_rows()),
            next_turn_id=session.next_turn_id,
            trace=session.trace.to_dict(),
        )

    def _persist(self, slot: SessionSlot) -> None:
        if self.store is None:
            return
        try:
            self.store.save(self._record(slot))
        except OSError as exc:
            # roll the live session back to the last durable record so
            # memory and disk agree that the turn never happened; the slot
            # (and its queue) stays, only the session state is replaced.
            # keep the advanced turn counter: the ledger refuses reused
            # turn ids, so the retried turn takes the next id instead
            previous = self.store.load(slot.session.session_id)
            if previous is not None:
                failed_counter = slot.session.next_turn_id
                slot.session = self._build_session(previous)
                slot.session.next_turn_id = max(
                    slot.session.next_turn_id, failed_counter
                )
            raise ApiError(500, "store_failure", f"could not persist turn: {exc}")


# ------------------------------------------------------------------- app


def _auth_guard(config: ApiConfig, request: Request) -> None:
    if not config.bearer_token:
        return
    if request.url.path == "/healthz":
        return
    header = request.headers.get("authorization", "")
    if header != f"Bearer {config.bearer_token}":
        raise ApiError(401, "unauthorized", "missing or invalid bearer token")


def _sse_format(event: dict) -> str:
    return f"event: {event['event']}\ndata: {json.dumps(event['data'])}\n\n"


def create_app(
    config: ApiConfig | None = None,
    *,
    backend: Backend | None = None,
    engine: ConversationEngine | None = None,
) -> FastAPI:
    """Assemble the service. A caller-supplied backend or engine takes
    precedence over the config (used by tests and the chat CLI)."""
    config = config or ApiConfig()
    config.validate()
    if engine is None:
        engine = ConversationEngine(
            Gateway(backend if backend is not None else config.build_backend()),
            matrix=config.build_matrix(),
        )
    store_dir = config.resolved_store_dir()
    store = SessionStore(store_dir) if store_dir is not None else None
    manager = SessionManager(engine, config.load_personas(), store)

    app = FastAPI(title="health-agents", docs_url=None, redoc_url=None)
    app.state.manager = manager
    app.state.config = config

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc):
        return JSONResponse(
            status_code=400,
            content={"code": "validation", "message": str(exc)},
        )

    @app.exception_handler(Exception)
    async def handle_internal_error(request: Request, exc):
        return JSONResponse(
            status_code=500,
            content={"code": "internal", "message": f"{type(exc).__name__}: {exc}"},
        )

    @app.middleware("http")
    async def check_auth(request: Request, call_next):
        try:
            _auth_guard(config, request)
        except ApiError as exc:
            return JSONResponse(
                status_code=exc.status,
                content={"code": exc.code, "message": exc.message},
            )
        return await call_next(request)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/personas")
    def personas():
        return manager.persona_summaries()

    @app.get("/sessions")
    def sessions():
        return [descriptor.to_dict() for descriptor in manager.descriptors()]

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        payload = await _json_body(request)
        descriptor = await run_in_threadpool(
            manager.create_session,
            str(payload.get("mode", "pha")),
            str(payload.get("persona_id", "")),
        )
        return descriptor.to_dict()

    @app.post("/sessions/{session_id}/messages")
    async def post_message(session_id: str, request: Request):
        payload = await _json_body(request)
        text = payload.get("text")
        if not isinstance(text, str):
            raise ApiError(400, "validation", "body needs a string 'text' field")
        return await run_in_threadpool(manager.handle_message, session_id, text)

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        return manager.slot(session_id).session.trace.to_dict()

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, after: int = 0, max_events: int | None = None):
        """Replay buffered events from index `after`, then follow live ones.
        With `max_events` the stream ends after that many events, waiting
        for them if needed; without it the stream never ends on its own."""
        slot = manager.slot(session_id)

        def stream() -> Iterator[str]:
            cursor = max(0, after)
            sent = 0
            while max_events is None or sent < max_events:
                fresh = slot.bus.snapshot(cursor)
                if fresh:
                    for event in fresh:
                        yield _sse_format(event)
                        sent += 1
                        if max_events is not None and sent >= max_events:
                            return
                    cursor += len(fresh)
                    continue
                slot.bus.wait_for_more(cursor, _EVENT_POLL_SECONDS)
                if not slot.bus.snapshot(cursor):
                    yield ": keep-alive\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


async def _json_body(request: Request) -> dict:
    try:
        payload = await request.json()
    except ValueError:
        raise ApiError(400, "validation", "body must be a JSON object")
    if not isinstance(payload, dict):
        raise ApiError(400, "validation", "body must be a JSON object")
    return payload
