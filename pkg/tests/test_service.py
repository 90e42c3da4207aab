"""HTTP service, session store, config, and CLI tests.

The engine is driven by a deterministic scripted backend keyed on template
id, so every turn routes, replies, and costs exactly the same way on every
run.  Store tests verify the write-then-rename durability contract; API
tests verify status codes, error body shape, read-only GETs, restart
recovery, per-session serialization, and the event stream."""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import shutil
import threading
import time
from importlib import resources
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from health_agents.data_model import load_tables, make_synthetic_tables, tables_to_wire
from health_agents.evals import cost_report
from health_agents.gateway import CompletionRequest, Gateway
from health_agents.orchestrator import ConversationEngine, SessionTrace
from health_agents.service import (
    ApiConfig,
    ConfigError,
    EventBus,
    QUEUE_BOUND,
    SessionRecord,
    SessionStore,
    create_app,
    load_config,
)
from health_agents.service.cli import main as cli_main
from health_agents.service.store import SessionDescriptor

QUERY = "How long is strep contagious?"
FINAL = "Strep stops being contagious about 24 hours after starting antibiotics."
_ACT = "[Thought]: Look this up.\n[Act]: search(strep contagious duration)"
_FINISH = f"[Finish]: {FINAL}"


class RoutedBackend:
    """Scripted backend keyed by template id.  A str handler always returns
    the same text; a list handler is a per-template queue; a callable gets
    (request, prompt) and runs outside the lock."""

    def __init__(self, handlers):
        self.handlers = handlers
        self.calls = []
        self._lock = threading.Lock()

    def generate(self, request, prompt):
        with self._lock:
            self.calls.append((request.template_id, request.agent_tag, prompt))
            handler = self.handlers.get(request.template_id)
            if handler is None:
                raise AssertionError(f"unscripted template {request.template_id!r}")
            resolved = handler.pop(0) if isinstance(handler, list) else handler
        if isinstance(resolved, str):
            return resolved
        return resolved(request, prompt)


def _react_toggle():
    # two model calls per turn: an act, then a finish once the tool
    # observation is in the transcript
    state = {"calls": 0}

    def handler(request, prompt):
        state["calls"] += 1
        return _ACT if state["calls"] % 2 else _FINISH

    return handler


def pha_handlers():
    return {
        "cuj-classify": "CUJ1",
        "F.2.3-rephrase": '{"de": "How long is strep throat contagious?"}',
        "D.2.1-react": _react_toggle(),
        "F.2.4-reflection": '{"decision": "NO", "reflection_questions": {}}',
        "memory-extract": "[]",
    }


PERSONA_TEXT = """# Demographics
Age: 67; Sex: Male
Employment Status: Part-time; Marital Status: Married or Partnered

# Blood Tests
Glucose: 145.0 (mg/dl); HBA1C: 6.9 (perc)

# Health Disease Conditions
Hypertension: 6-10 years; Diabetes: 6-10 years

# Wearable Data Records
Supplemental figure below.

# User Story
A 67 year old male who has some health problems.

# User Goal that they want to get advice
He would like to try to find a way to be more active.
"""


def make_service(tmp_path, *, store=True, token="", data_dir=None, handlers=None):
    backend = RoutedBackend(handlers if handlers is not None else pha_handlers())
    config = ApiConfig(
        store_dir=str(tmp_path / "store") if store else None,
        bearer_token=token,
        data_dir=str(data_dir) if data_dir is not None else None,
    )
    app = create_app(config, backend=backend)
    client = TestClient(app, raise_server_exceptions=False)
    return client, app, backend, config


def persona_data_dir(tmp_path):
    root = tmp_path / "data"
    (root / "personas").mkdir(parents=True)
    (root / "tables").mkdir()
    (root / "personas" / "alice.txt").write_text(PERSONA_TEXT, encoding="utf-8")
    tables, _meta = make_synthetic_tables(seed=7, days=40)
    (root / "tables" / "alice.json").write_text(
        json.dumps(tables_to_wire(tables)), encoding="utf-8"
    )
    return root


def open_session(client, mode="pha", persona_id=""):
    response = client.post("/sessions", json={"mode": mode, "persona_id": persona_id})
    assert response.status_code == 201, response.text
    return response.json()["session_id"]


def send(client, session_id, text=QUERY):
    return client.post(f"/sessions/{session_id}/messages", json={"text": text})


def dir_fingerprint(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(path.name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def _bundled_matrix_text() -> str:
    return (
        resources.files("health_agents.orchestrator")
        .joinpath("data/collaboration_matrix.json")
        .read_text(encoding="utf-8")
    )


# ----------------------------------------------------------------- config


class TestConfig:
    def test_load_config_resolves_paths_against_config_dir(self, tmp_path):
        base = tmp_path / "etc"
        base.mkdir()
        (base / "matrix.json").write_text(_bundled_matrix_text(), encoding="utf-8")
        (base / "config.json").write_text(
            json.dumps(
                {
                    "host": "0.0.0.0",
                    "port": 9001,
                    "backend": {"kind": "scripted", "strict": False},
                    "matrix_path": "matrix.json",
                    "store_dir": "sessions",
                    "bearer_token": "hunter2",
                }
            ),
            encoding="utf-8",
        )
        config = load_config(base / "config.json")
        assert config.host == "0.0.0.0"
        assert config.port == 9001
        assert config.bearer_token == "hunter2"
        assert config.resolved_store_dir() == base / "sessions"
        matrix = config.build_matrix()
        assert len(matrix.rows) == 26

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"prot": 8000}), encoding="utf-8")
        with pytest.raises(ConfigError, match="unknown config keys.*prot"):
            load_config(path)

    def test_missing_config_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(tmp_path / "absent.json")

    def test_non_object_config_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError, match="top level"):
            load_config(path)

    def test_validate_collects_every_problem(self, tmp_path):
        config = ApiConfig(
            port=70000,
            backend={"kind": "carrier-pigeon"},
            tool_fixture_dir="no-tools",
            matrix_path="no-matrix.json",
            data_dir="no-data",
            base_dir=tmp_path,
        )
        with pytest.raises(ConfigError) as err:
            config.validate()
        message = str(err.value)
        for fragment in (
            "port out of range",
            "unknown backend kind",
            "tool fixture dir missing",
            "matrix file missing",
            "data dir missing",
        ):
            assert fragment in message

    def test_playbook_file_must_exist(self, tmp_path):
        config = ApiConfig(
            backend={"kind": "scripted", "playbook": "absent.json"},
            base_dir=tmp_path,
        )
        with pytest.raises(ConfigError, match="playbook missing"):
            config.validate()

    def test_playbook_rejected_for_http_backend(self, tmp_path):
        playbook = tmp_path / "pb.json"
        playbook.write_text("{}", encoding="utf-8")
        config = ApiConfig(
            backend={
                "kind": "http",
                "endpoint": "http://127.0.0.1:1",
                "model-name": "m",
                "playbook": str(playbook),
            },
            base_dir=tmp_path,
        )
        config.validate()
        with pytest.raises(ConfigError, match="scripted backends only"):
            config.build_backend()

    def test_playbook_preloads_scripted_and_queued_responses(self, tmp_path):
        playbook = tmp_path / "pb.json"
        playbook.write_text(
            json.dumps(
                {
                    "scripted": [
                        {
                            "template_id": "cuj-classify",
                            "variables": {"q": "x"},
                            "response": "CUJ1",
                        }
                    ],
                    "queue": ["first", "second"],
                }
            ),
            encoding="utf-8",
        )
        config = ApiConfig(
            backend={"kind": "scripted", "playbook": "pb.json"}, base_dir=tmp_path
        )
        backend = config.build_backend()
        scripted = CompletionRequest(
            template_id="cuj-classify", variables={"q": "x"}, agent_tag="orchestrator"
        )
        other = CompletionRequest(
            template_id="cuj-classify", variables={"q": "y"}, agent_tag="orchestrator"
        )
        assert backend.generate(scripted, "") == "CUJ1"
        assert backend.generate(other, "") == "first"
        assert backend.generate(other, "") == "second"
        # the exact-match entry is not consumed by queue pops
        assert backend.generate(scripted, "") == "CUJ1"

    def test_personas_loaded_from_data_dir(self, tmp_path):
        root = persona_data_dir(tmp_path)
        config = ApiConfig(data_dir=str(root))
        bundles = config.load_personas()
        assert set(bundles) == {"alice"}
        assert bundles["alice"].profile.goal.startswith("He would like")
        assert bundles["alice"].tables is not None
        assert len(bundles["alice"].tables.summary) == 40


# ------------------------------------------------------------------ store


def _record(session_id, status="open", text="hi"):
    return SessionRecord(
        descriptor=SessionDescriptor(
            session_id=session_id,
            mode="pha",
            persona_id="",
            created_at="2026-08-16T00:00:00+00:00",
            status=status,
        ),
        conversation=(("user", text), ("assistant", "hello")),
        memory_rows=(),
        next_turn_id=2,
        trace={"session_id": session_id, "mode": "pha", "persona_id": "", "turns": []},
    )


class TestStore:
    def test_round_trip(self, tmp_path):
        store = SessionStore(tmp_path / "store")
        record = _record("abc123")
        store.save(record)
        loaded = store.load("abc123")
        assert loaded == record
        assert store.list_ids() == ("abc123",)
        assert store.load_all() == (record,)

    def test_fresh_directory_is_empty(self, tmp_path):
        store = SessionStore(tmp_path / "store")
        assert store.load("nothing") is None
        assert store.list_ids() == ()
        assert store.load_all() == ()

    def test_failed_rename_keeps_previous_record(self, tmp_path, monkeypatch):
        store = SessionStore(tmp_path / "store")
        first = _record("abc123", text="first")
        store.save(first)

        def boom(src, dst):
            raise OSError("no space left")

        monkeypatch.setattr("health_agents.service.store.os.replace", boom)
        with pytest.raises(OSError):
            store.save(_record("abc123", text="second"))
        monkeypatch.undo()
        assert store.load("abc123") == first

    def test_unusable_session_ids_rejected(self, tmp_path):
        store = SessionStore(tmp_path / "store")
        for bad in ("", "a/b", ".hidden", ".."):
            with pytest.raises(ValueError):
                store.load(bad)

    def test_temp_files_not_listed_as_sessions(self, tmp_path):
        store = SessionStore(tmp_path / "store")
        store.save(_record("abc123"))
        (store.root / "leftover.json.tmp").write_text("{}", encoding="utf-8")
        assert store.list_ids() == ("abc123",)


# -------------------------------------------------------------- event bus


class TestEventBus:
    def test_publish_snapshot_and_wait(self):
        bus = EventBus()
        bus.publish("a", {"n": 1})
        bus.publish("b", {"n": 2})
        assert [event["event"] for event in bus.snapshot(0)] == ["a", "b"]
        assert [event["event"] for event in bus.snapshot(1)] == ["b"]
        assert bus.snapshot(5) == []

        def late_publish():
            time.sleep(0.05)
            bus.publish("c", {"n": 3})

        thread = threading.Thread(target=late_publish)
        thread.start()
        bus.wait_for_more(2, timeout=5.0)
        thread.join()
        assert len(bus.snapshot(0)) == 3

    def test_wait_returns_immediately_when_events_already_known(self):
        bus = EventBus()
        bus.publish("a", {})
        started = time.perf_counter()
        bus.wait_for_more(0, timeout=5.0)
        assert time.perf_counter() - started < 1.0


# -------------------------------------------------------------------- api


class TestApi:
    def test_healthz(self, tmp_path):
        client, *_ = make_service(tmp_path)
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_personas_endpoint(self, tmp_path):
        root = persona_data_dir(tmp_path)
        client, *_ = make_service(tmp_path, data_dir=root)
        payload = client.get("/personas").json()
        assert len(payload) == 1
        summary = payload[0]
        assert summary["id"] == "alice"
        assert ["Age", "67"] in summary["demographics"]
        assert ["Hypertension", "6-10 years"] in summary["conditions"]
        assert summary["goal"].startswith("He would like")
        assert summary["has_tables"] is True

    def test_create_session_returns_descriptor(self, tmp_path):
        client, *_ = make_service(tmp_path)
        response = client.post("/sessions", json={"mode": "pha", "persona_id": ""})
        assert response.status_code == 201
        body = response.json()
        assert body["mode"] == "pha"
        assert body["persona_id"] == ""
        assert body["status"] == "open"
        assert body["session_id"]
        assert body["created_at"]
        listed = client.get("/sessions").json()
        assert [entry["session_id"] for entry in listed] == [body["session_id"]]

    def test_create_session_defaults(self, tmp_path):
        client, *_ = make_service(tmp_path)
        response = client.post("/sessions", json={})
        assert response.status_code == 201
        assert response.json()["mode"] == "pha"

    def test_create_session_rejects_bad_mode(self, tmp_path):
        client, *_ = make_service(tmp_path)
        response = client.post("/sessions", json={"mode": "chorus"})
        assert response.status_code == 400
        assert response.json()["code"] == "validation"

    def test_create_session_rejects_unknown_persona(self, tmp_path):
        client, *_ = make_service(tmp_path)
        response = client.post("/sessions", json={"mode": "pha", "persona_id": "bob"})
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_persona"

    def test_scripted_turn_end_to_end(self, tmp_path):
        client, app, backend, _config = make_service(tmp_path)
        session_id = open_session(client)
        response = send(client, session_id, "What is HRV?")
        assert response.status_code == 200
        assert response.json() == {"reply": FINAL, "turn_id": 1}
        trace = client.get(f"/sessions/{session_id}/trace").json()
        assert trace["session_id"] == session_id
        assert len(trace["turns"]) == 1
        turn = trace["turns"][0]
        assert turn["user_message"] == "What is HRV?"
        assert turn["routing"]["main"] == "de"
        assert turn["routing"]["supporting"] == []
        assert turn["label"] == "CUJ1"
        assert turn["llm_calls"] == 6
        assert turn["reply"] == FINAL
        templates = [call[0] for call in backend.calls]
        assert templates == [
            "cuj-classify",
            "F.2.3-rephrase",
            "D.2.1-react",
            "D.2.1-react",
            "F.2.4-reflection",
            "memory-extract",
        ]

    def test_turn_ids_strictly_increase(self, tmp_path):
        client, *_ = make_service(tmp_path)
        session_id = open_session(client)
        turn_ids = [send(client, session_id).json()["turn_id"] for _ in range(3)]
        assert turn_ids == [1, 2, 3]
        trace = client.get(f"/sessions/{session_id}/trace").json()
        assert [turn["turn_id"] for turn in trace["turns"]] == [1, 2, 3]

    def test_unknown_session_message_404(self, tmp_path):
        client, *_ = make_service(tmp_path)
        response = send(client, "nope")
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_session"

    def test_unknown_session_trace_404(self, tmp_path):
        client, *_ = make_service(tmp_path)
        response = client.get("/sessions/nope/trace")
        assert response.status_code == 404

    def test_empty_text_rejected(self, tmp_path):
        client, *_ = make_service(tmp_path)
        session_id = open_session(client)
        response = send(client, session_id, "   ")
        assert response.status_code == 400
        assert response.json()["code"] == "validation"

    def test_non_string_text_rejected(self, tmp_path):
        client, *_ = make_service(tmp_path)
        session_id = open_session(client)
        response = client.post(f"/sessions/{session_id}/messages", json={"text": 7})
        assert response.status_code == 400

    def test_non_object_body_rejected(self, tmp_path):
        client, *_ = make_service(tmp_path)
        session_id = open_session(client)
        url = f"/sessions/{session_id}/messages"
        assert client.post(url, json=[1, 2]).status_code == 400
        response = client.post(
            url, content=b"not json", headers={"content-type": "application/json"}
        )
        assert response.status_code == 400

    def test_message_to_ended_session_409(self, tmp_path):
        client, app, *_ = make_service(tmp_path)
        session_id = open_session(client)
        app.state.manager.slot(session_id).session.hc.ended = True
        response = send(client, session_id)
        assert response.status_code == 409
        assert response.json()["code"] == "session_ended"

    def test_every_error_body_has_code_and_message(self, tmp_path):
        client, app, *_ = make_service(tmp_path)
        session_id = open_session(client)
        app.state.manager.slot(session_id).session.hc.ended = True
        errors = [
            client.post("/sessions", json={"mode": "chorus"}),
            client.post("/sessions", json={"persona_id": "bob"}),
            send(client, "missing-session"),
            client.get("/sessions/missing-session/trace"),
            send(client, session_id),
        ]
        for response in errors:
            assert response.status_code >= 400
            assert set(response.json()) == {"code", "message"}

    def test_get_endpoints_never_mutate_the_store(self, tmp_path):
        client, *_ = make_service(tmp_path)
        session_id = open_session(client)
        send(client, session_id)
        store_dir = tmp_path / "store"
        before = dir_fingerprint(store_dir)
        for _ in range(2):
            assert client.get("/healthz").status_code == 200
            assert client.get("/personas").status_code == 200
            assert client.get("/sessions").status_code == 200
            assert client.get(f"/sessions/{session_id}/trace").status_code == 200
        assert dir_fingerprint(store_dir) == before

    def test_bearer_token_required_when_configured(self, tmp_path):
        client, *_ = make_service(tmp_path, token="sekrit-token")
        assert client.get("/healthz").status_code == 200
        denied = client.get("/sessions")
        assert denied.status_code == 401
        assert denied.json()["code"] == "unauthorized"
        wrong = client.get(
            "/sessions", headers={"Authorization": "Bearer other-token"}
        )
        assert wrong.status_code == 401
        allowed = client.get(
            "/sessions", headers={"Authorization": "Bearer sekrit-token"}
        )
        assert allowed.status_code == 200

    def test_queue_bound_returns_busy(self, tmp_path):
        client, app, *_ = make_service(tmp_path)
        session_id = open_session(client)
        slot = app.state.manager.slot(session_id)
        slot.waiters = QUEUE_BOUND
        response = send(client, session_id)
        assert response.status_code == 409
        assert response.json()["code"] == "busy"
        slot.waiters = 0
        assert send(client, session_id).status_code == 200

    def test_concurrent_messages_serialize_with_distinct_turn_ids(self, tmp_path):
        client, *_ = make_service(tmp_path)
        session_id = open_session(client)
        results = []
        results_lock = threading.Lock()

        def worker():
            response = send(client, session_id)
            with results_lock:
                results.append(response)

        threads = [threading.Thread(target=worker) for _ in range(2)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join(timeout=60)
        assert [response.status_code for response in results] == [200, 200]
        assert sorted(response.json()["turn_id"] for response in results) == [1, 2]
        trace = client.get(f"/sessions/{session_id}/trace").json()
        assert [turn["turn_id"] for turn in trace["turns"]] == [1, 2]
        assert all(turn["llm_calls"] == 6 for turn in trace["turns"])

    def test_store_failure_returns_500_and_keeps_prior_state(self, tmp_path):
        client, app, *_ = make_service(tmp_path)
        manager = app.state.manager
        session_id = open_session(client)
        assert send(client, session_id).status_code == 200

        original_save = manager.store.save

        def boom(record):
            raise OSError("disk full")

        manager.store.save = boom
        try:
            failed = send(client, session_id)
        finally:
            manager.store.save = original_save
        assert failed.status_code == 500
        assert failed.json()["code"] == "store_failure"

        trace = client.get(f"/sessions/{session_id}/trace").json()
        assert [turn["turn_id"] for turn in trace["turns"]] == [1]

        # the failed turn id is never reused; the retry takes the next one
        retried = send(client, session_id)
        assert retried.status_code == 200
        assert retried.json() == {"reply": FINAL, "turn_id": 3}
        trace = client.get(f"/sessions/{session_id}/trace").json()
        assert [turn["turn_id"] for turn in trace["turns"]] == [1, 3]


# ----------------------------------------------------------- event stream


def read_events(client, session_id, *, after=None, max_events=4):
    # the test transport buffers whole responses, so every read asks for a
    # bounded stream; unbounded streams need a real server
    params = {"max_events": max_events}
    if after is not None:
        params["after"] = after
    response = client.get(f"/sessions/{session_id}/events", params=params)
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/event-stream")
    events = []
    current = None
    for line in response.text.splitlines():
        if line.startswith("event: "):
            current = line[len("event: ") :]
        elif line.startswith("data: ") and current is not None:
            events.append((current, json.loads(line[len("data: ") :])))
            current = None
    return events


class TestEventStream:
    def test_turn_lifecycle_events_in_order(self, tmp_path):
        client, *_ = make_service(tmp_path)
        session_id = open_session(client)
        send(client, session_id)
        events = read_events(client, session_id)
        assert [name for name, _ in events] == [
            "turn_started",
            "agent_invoked",
            "reflection_round",
            "turn_completed",
        ]
        started = events[0][1]
        assert started == {"turn_id": 1, "mode": "pha", "text": QUERY}
        invoked = events[1][1]
        assert invoked["agent"] == "de"
        assert invoked["role"] == "main"
        assert invoked["sub_query"] == "How long is strep throat contagious?"
        reflection = events[2][1]
        assert reflection == {"turn_id": 1, "round": 1, "decision": "NO"}
        completed = events[3][1]
        assert completed["reply"] == FINAL
        assert completed["llm_calls"] == 6
        assert completed["status"] == "open"

    def test_stream_replays_from_cursor(self, tmp_path):
        client, *_ = make_service(tmp_path)
        session_id = open_session(client)
        send(client, session_id)
        events = read_events(client, session_id, after=2, max_events=2)
        assert [name for name, _ in events] == ["reflection_round", "turn_completed"]

    def test_stream_delivers_events_published_while_waiting(self, tmp_path):
        client, *_ = make_service(tmp_path)
        session_id = open_session(client)

        def post_later():
            time.sleep(0.1)
            send(client, session_id)

        poster = threading.Thread(target=post_later)
        poster.start()
        try:
            events = read_events(client, session_id, max_events=4)
        finally:
            poster.join(timeout=60)
        assert [name for name, _ in events] == [
            "turn_started",
            "agent_invoked",
            "reflection_round",
            "turn_completed",
        ]
        assert events[3][1]["reply"] == FINAL


# ---------------------------------------------------------------- restart


class TestRestart:
    def test_restart_restores_sessions_and_traces(self, tmp_path):
        config = ApiConfig(store_dir=str(tmp_path / "store"))
        first_app = create_app(config, backend=RoutedBackend(pha_handlers()))
        first = TestClient(first_app, raise_server_exceptions=False)
        session_id = open_session(first)
        assert send(first, session_id).json()["turn_id"] == 1
        trace_before = first.get(f"/sessions/{session_id}/trace").json()

        second_app = create_app(config, backend=RoutedBackend(pha_handlers()))
        second = TestClient(second_app, raise_server_exceptions=False)
        listed = second.get("/sessions").json()
        assert [entry["session_id"] for entry in listed] == [session_id]
        assert listed[0]["status"] == "open"
        trace_after = second.get(f"/sessions/{session_id}/trace").json()
        assert trace_after == trace_before

        # the restored session keeps counting from where it stopped
        response = send(second, session_id)
        assert response.status_code == 200
        assert response.json()["turn_id"] == 2

    def test_restart_preserves_ended_status(self, tmp_path):
        config = ApiConfig(store_dir=str(tmp_path / "store"))
        first_app = create_app(config, backend=RoutedBackend(pha_handlers()))
        first = TestClient(first_app, raise_server_exceptions=False)
        session_id = open_session(first)
        send(first, session_id)
        record_path = tmp_path / "store" / f"{session_id}.json"
        record = json.loads(record_path.read_text(encoding="utf-8"))
        record["descriptor"]["status"] = "ended"
        record_path.write_text(json.dumps(record), encoding="utf-8")

        second_app = create_app(config, backend=RoutedBackend(pha_handlers()))
        second = TestClient(second_app, raise_server_exceptions=False)
        assert second.get("/sessions").json()[0]["status"] == "ended"
        response = send(second, session_id)
        assert response.status_code == 409
        assert response.json()["code"] == "session_ended"

    def test_sessions_persist_at_creation(self, tmp_path):
        config = ApiConfig(store_dir=str(tmp_path / "store"))
        first_app = create_app(config, backend=RoutedBackend(pha_handlers()))
        first = TestClient(first_app, raise_server_exceptions=False)
        session_id = open_session(first)

        second_app = create_app(config, backend=RoutedBackend(pha_handlers()))
        second = TestClient(second_app, raise_server_exceptions=False)
        assert [s["session_id"] for s in second.get("/sessions").json()] == [
            session_id
        ]


# -------------------------------------------------------------------- cli


def _write_csv_tables(root: Path, days=40) -> Path:
    tables, _meta = make_synthetic_tables(seed=7, days=days)
    wire = tables_to_wire(tables)
    root.mkdir(parents=True, exist_ok=True)
    for name, block in wire.items():
        columns = list(block.keys())
        with (root / f"{name}.csv").open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(columns)
            for row in zip(*[block[column] for column in columns]):
                writer.writerow(["" if value is None else value for value in row])
    return root


def _session_trace_dict(turns=2):
    backend = RoutedBackend(pha_handlers())
    engine = ConversationEngine(Gateway(backend), max_workers=1)
    session = engine.open_session("cli-trace", mode="pha")
    for _ in range(turns):
        engine.respond(session, QUERY)
    return session.trace.to_dict()


class TestCli:
    def test_unknown_subcommand_exits_2_with_usage(self, capsys):
        with pytest.raises(SystemExit) as err:
            cli_main(["frobnicate"])
        assert err.value.code == 2
        assert "usage:" in capsys.readouterr().err

    def test_no_arguments_exits_2(self, capsys):
        with pytest.raises(SystemExit) as err:
            cli_main([])
        assert err.value.code == 2
        assert "usage:" in capsys.readouterr().err

    def test_serve_with_missing_config_fails(self, tmp_path, capsys):
        rc = cli_main(["serve", "--config", str(tmp_path / "absent.json")])
        assert rc == 1
        assert "config error:" in capsys.readouterr().err

    def test_cost_table_matches_library_report(self, tmp_path, capsys):
        trace_dict = _session_trace_dict(turns=2)
        traces_path = tmp_path / "traces.json"
        traces_path.write_text(
            json.dumps({"traces": [trace_dict]}), encoding="utf-8"
        )
        expected = cost_report([SessionTrace.from_dict(trace_dict)])

        rc = cli_main(["cost", "--traces", str(traces_path)])
        assert rc == 0
        assert capsys.readouterr().out.strip() == expected.render_text().strip()

        rc = cli_main(["cost", "--traces", str(traces_path), "--json"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out) == expected.to_json_dict()

    def test_cost_accepts_bare_list_payload(self, tmp_path, capsys):
        trace_dict = _session_trace_dict(turns=1)
        traces_path = tmp_path / "traces.json"
        traces_path.write_text(json.dumps([trace_dict]), encoding="utf-8")
        rc = cli_main(["cost", "--traces", str(traces_path), "--json"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["total_turns"] == 1
        assert payload["modes"]["pha"]["mean_calls_per_turn"] == 6.0

    def test_eval_ddx_exact_judge(self, tmp_path, capsys):
        cases_path = str(
            resources.files("health_agents.evals").joinpath("data/ddx_cases.json")
        )
        out_path = tmp_path / "ddx.json"
        rc = cli_main(
            ["eval", "ddx", "--cases", cases_path, "--out", str(out_path)]
        )
        assert rc == 0
        line = capsys.readouterr().out
        assert "cases=4 scored=4 excluded=0" in line
        assert "top1=0.250" in line
        assert "top5=0.500" in line
        assert "top10=0.750" in line
        payload = json.loads(out_path.read_text(encoding="utf-8"))
        assert payload["scored_cases"] == 4

    def test_eval_ddx_threshold_violation_exits_1(self, tmp_path, capsys):
        cases_path = str(
            resources.files("health_agents.evals").joinpath("data/ddx_cases.json")
        )
        rc = cli_main(
            [
                "eval",
                "ddx",
                "--cases",
                cases_path,
                "--out",
                str(tmp_path / "ddx.json"),
                "--min-top10",
                "0.9",
            ]
        )
        assert rc == 1
        assert "below threshold" in capsys.readouterr().err

    def test_eval_code_runs_bundled_suites(self, tmp_path, capsys):
        suites_src = Path(
            str(resources.files("health_agents.evals").joinpath("data/suites"))
        )
        suites_dir = tmp_path / "suites"
        shutil.copytree(suites_src, suites_dir)
        out_path = tmp_path / "code.json"
        rc = cli_main(
            [
                "eval",
                "code",
                "--suites",
                str(suites_dir),
                "--out",
                str(out_path),
                "--min-pass-rate",
                "1.0",
            ]
        )
        assert rc == 0
        printed = capsys.readouterr().out
        assert "sleep-activity-low-data" in printed
        assert "sleep-activity-normal" in printed
        payload = json.loads(out_path.read_text(encoding="utf-8"))
        assert len(payload["suites"]) == 2
        assert all(suite["pass_rate"] == 1.0 for suite in payload["suites"])

    def test_eval_code_with_no_suites_exits_1(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        rc = cli_main(
            ["eval", "code", "--suites", str(empty), "--out", str(tmp_path / "o.json")]
        )
        assert rc == 1
        assert "no suite files" in capsys.readouterr().err

    def test_eval_plan_with_unscripted_backend_grades_conservatively(
        self, tmp_path, capsys
    ):
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps({"backend": {"kind": "scripted", "strict": False}}),
            encoding="utf-8",
        )
        queries_path = tmp_path / "plans.json"
        queries_path.write_text(
            json.dumps(
                {
                    "plans": [
                        {
                            "query": "How did I sleep last month?",
                            "data_summary": "summary table columns",
                            "plan": "== Approach ==\n1. Average sleep_minutes.",
                        }
                    ]
                }
            ),
            encoding="utf-8",
        )
        out_path = tmp_path / "plan-scores.json"
        rc = cli_main(
            [
                "eval",
                "plan",
                "--queries",
                str(queries_path),
                "--out",
                str(out_path),
                "--config",
                str(config_path),
            ]
        )
        assert rc == 0
        assert "graded 1 plans; mean normalized score 0.125" in capsys.readouterr().out
        payload = json.loads(out_path.read_text(encoding="utf-8"))
        assert payload["mean_normalized"] == 0.125
        assert payload["plans"][0]["flagged"]

        rc = cli_main(
            [
                "eval",
                "plan",
                "--queries",
                str(queries_path),
                "--out",
                str(out_path),
                "--config",
                str(config_path),
                "--min-score",
                "0.5",
            ]
        )
        assert rc == 1

    def test_ingest_round_trips_csv_tables(self, tmp_path, capsys):
        csv_dir = _write_csv_tables(tmp_path / "csv")
        out_path = tmp_path / "tables.json"
        rc = cli_main(["ingest", "--dir", str(csv_dir), "--out", str(out_path)])
        assert rc == 0
        assert "rows kept" in capsys.readouterr().out
        tables = load_tables(out_path)
        assert len(tables.summary) == 40
        assert len(tables.population) == 132

    def test_ingest_missing_directory_exits_1(self, tmp_path, capsys):
        rc = cli_main(["ingest", "--dir", str(tmp_path / "absent")])
        assert rc == 1
        assert "ingest failed" in capsys.readouterr().err

    def test_chat_quits_cleanly(self, tmp_path, capsys, monkeypatch):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO("/quit\n"))
        rc = cli_main(["chat", "--mode", "pha"])
        assert rc == 0
        assert "empty line or /quit ends the chat" in capsys.readouterr().out

    def test_chat_unknown_persona_exits_1(self, capsys):
        rc = cli_main(["chat", "--persona", "ghost"])
        assert rc == 1
        assert "unknown persona" in capsys.readouterr().err

    def test_chat_scripted_turn_via_playbook(self, tmp_path, capsys, monkeypatch):
        import io

        playbook = {
            "queue": [
                "CUJ1",
                '{"de": "How long is strep throat contagious?"}',
                _ACT,
                _FINISH,
                '{"decision": "NO", "reflection_questions": {}}',
                "[]",
            ]
        }
        (tmp_path / "pb.json").write_text(json.dumps(playbook), encoding="utf-8")
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps({"backend": {"kind": "scripted", "playbook": "pb.json"}}),
            encoding="utf-8",
        )
        monkeypatch.setattr("sys.stdin", io.StringIO(f"{QUERY}\n/quit\n"))
        rc = cli_main(["chat", "--config", str(config_path)])
        assert rc == 0
        assert f"[turn 1] {FINAL}" in capsys.readouterr().out
