"""Record chat-ui test fixtures by driving the backend HTTP API.

Each fixture captures, verbatim, every payload the UI consumes for one
scripted session: the POST /sessions descriptor, the message responses,
the replayed event stream, the final trace, the refreshed descriptor
list entry, and the personas payload.  Run from the repository root:

    python3 frontend/scripts/record_fixtures.py
"""

import json
import re
from pathlib import Path

from starlette.testclient import TestClient

from health_agents.data_model import make_synthetic_tables, tables_to_wire
from health_agents.service import ApiConfig, create_app

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

STREP_QUERY = "How long is strep contagious?"
SLEEP_QUERY = "How do I improve my deep sleep?"
CORNER_QUERY = "I want to see all my past conversations"
FINAL = "Strep stops being contagious about 24 hours after starting antibiotics."

ACT = "[Thought]: Look this up.\n[Act]: search(strep contagious duration)"
FINISH = f"[Finish]: {FINAL}"

SLEEP_PLAN = """The query asks for the average nightly sleep. The sleep_minutes
column of the Summary DataFrame covers this directly.
== Approach ==
1. Timeframe: Use the last 1 year of available data ending at the most recent date.
2. Filter the Summary DataFrame rows to the chosen window and select the sleep_minutes column.
3. Compute the nightly sleep series for each remaining day.
4. Check that at least 2 rows remain; if insufficient, return a message indicating this.
5. Calculate the mean of the selected sleep_minutes values.
6. Return the calculated average sleep value.
"""

UNANSWERABLE_PLAN = (
    "== Discussion ==\nNo wearable data bears on this question.\n"
    "== Approach ==\n1. This question cannot be answered with the"
    " available data."
)

SLEEP_CODE = """```python
def analysis(summary_df, activities_df, profile_df, population_df):
    values = summary_df["sleep_minutes"].tolist()
    return {"mean_sleep_minutes": round(float(sum(values) / len(values)), 1)}
```"""

PERSONA_TEXT = """# Demographics
Age: 34; Sex: Female
Height: 1.68 (m); Weight: 63.5 (kg)

# Health Disease Conditions
Seasonal Allergies: 1-5 years

# User Goal that they want to get advice
Improve my deep sleep and feel rested.
"""


class RoutedBackend:
    """Deterministic scripted backend keyed by template id; str handlers
    repeat, list handlers are queues, callables get (request, prompt)."""

    def __init__(self, handlers):
        self.handlers = handlers

    def generate(self, request, prompt):
        handler = self.handlers.get(request.template_id)
        if handler is None:
            raise AssertionError(f"unscripted template {request.template_id!r}")
        resolved = handler.pop(0) if isinstance(handler, list) else handler
        if isinstance(resolved, str):
            return resolved
        return resolved(request, prompt)


def react_toggle():
    state = {"calls": 0}

    def handler(request, prompt):
        state["calls"] += 1
        return ACT if state["calls"] % 2 else FINISH

    return handler


def phia_cycle():
    steps = [
        "[Thought]: Search first.\n[Act]: search(strep contagious)",
        "[Thought]: No data needed.\n[Act]: tool_code(1 + 1)",
        "[Finish]: Strep is contagious until about 24 hours after"
        " antibiotics start.",
    ]
    state = {"calls": 0}

    def handler(request, prompt):
        reply = steps[state["calls"] % len(steps)]
        state["calls"] += 1
        return reply

    return handler


def narrate(request, prompt):
    match = re.search(r'"mean_sleep_minutes": ([0-9.]+)', prompt)
    assert match, "sandbox result missing from narration prompt"
    return f"Average nightly sleep is {match.group(1)} minutes."


def revised_coach(request, prompt):
    match = re.search(r"Average nightly sleep is ([0-9.]+) minutes", prompt)
    assert match, "reflection insight missing from coach reprompt"
    return (
        f"You average {match.group(1)} minutes of sleep a night;"
        " let's protect a consistent wind-down window."
    )


def pha_knowledge_handlers():
    return {
        "cuj-classify": "CUJ1",
        "F.2.3-rephrase": '{"de": "How long is strep throat contagious?"}',
        "D.2.1-react": react_toggle(),
        "F.2.4-reflection": '{"decision": "NO", "reflection_questions": {}}',
        "memory-extract": "[]",
    }


def pha_sleep_handlers():
    return {
        "cuj-classify": "CUJ3",
        "F.2.3-rephrase": '{"hc": "Coach on deep sleep.",'
        ' "ds": "What is the average nightly sleep?"}',
        "C.3.2-plan": SLEEP_PLAN,
        "C.3.4-code": SLEEP_CODE,
        "ds-narrate": narrate,
        "E.2.4-check": "CONTINUE",
        "E.2.3-gate": "[VERDICT]: NOREC",
        "E.2.2-coach-pha": ["What usually keeps you up at night?", revised_coach],
        "F.2.4-reflection": [
            '{"decision": "YES", "reflection_questions":'
            ' {"ds": "What is the average nightly sleep duration?"}}',
            '{"decision": "NO", "reflection_questions": {}}',
        ],
        "memory-extract": '[{"kind": "goal", "content": "Improve deep sleep"},'
        ' {"kind": "barrier", "content": "Late screen time"}]',
    }


def parallel_handlers():
    return {
        "C.3.2-plan": UNANSWERABLE_PLAN,
        "D.2.1-react": react_toggle(),
        "E.2.4-check": "CONTINUE",
        "E.2.3-gate": "[VERDICT]: NOREC",
        "E.2.2-coach": "What prompted the question about strep?",
        "F.2.6-synthesize": "Strep usually stops being contagious about 24"
        " hours after starting antibiotics.",
    }


def single_handlers():
    return {"F.2.5-phia": phia_cycle()}


def fallback_then_finish_handlers():
    return {
        "cuj-classify": ["CUJ1", "CUJ3"],
        "fallback-reply": "I can't browse your conversation history, but the"
        " chat log above shows this session.",
        "F.2.3-rephrase": '{"hc": "Coach on deep sleep.",'
        ' "ds": "What is the average nightly sleep?"}',
        "C.3.2-plan": UNANSWERABLE_PLAN,
        "E.2.4-check": "FINISH",
        "E.2.4-summary": "We covered your sleep goal; rest well and check back"
        " in after a week of earlier nights.",
        "memory-extract": "[]",
    }


def read_events(client, session_id, count):
    response = client.get(
        f"/sessions/{session_id}/events",
        params={"after": 0, "max_events": count},
    )
    assert response.status_code == 200, response.text
    events = []
    event_type = None
    for line in response.text.splitlines():
        if line.startswith("event: "):
            event_type = line[len("event: ") :]
        elif line.startswith("data: "):
            events.append({"event": event_type, "data": json.loads(line[len("data: ") :])})
            event_type = None
    assert len(events) == count, (len(events), count)
    return events


def record(name, handlers, mode, messages, persona_id="", data_dir=None):
    config = ApiConfig(data_dir=str(data_dir) if data_dir else None)
    app = create_app(config, backend=RoutedBackend(handlers))
    client = TestClient(app, raise_server_exceptions=False)

    personas = client.get("/personas").json()
    created = client.post(
        "/sessions", json={"mode": mode, "persona_id": persona_id}
    )
    assert created.status_code == 201, created.text
    descriptor = created.json()
    session_id = descriptor["session_id"]

    exchanges = []
    for text in messages:
        response = client.post(f"/sessions/{session_id}/messages", json={"text": text})
        assert response.status_code == 200, response.text
        exchanges.append({"text": text, "response": response.json()})

    trace = client.get(f"/sessions/{session_id}/trace").json()
    listed = [
        entry
        for entry in client.get("/sessions").json()
        if entry["session_id"] == session_id
    ]
    total_events = 2 * len(trace["turns"]) + sum(
        len(turn["exchanges"]) + len(turn["reflection_rounds"])
        for turn in trace["turns"]
    )
    fixture = {
        "name": name,
        "personas": personas,
        "created": descriptor,
        "descriptor": listed[0],
        "messages": exchanges,
        "events": read_events(client, session_id, total_events),
        "trace": trace,
    }
    out = OUT_DIR / f"{name}.json"
    out.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n", "utf-8")
    turns = trace["turns"]
    print(
        f"{name}: turns={len(turns)}"
        f" calls={[t['llm_calls'] for t in turns]}"
        f" rounds={[len(t['reflection_rounds']) for t in turns]}"
        f" status={fixture['descriptor']['status']}"
    )


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        data_dir = Path(tmp) / "data"
        (data_dir / "personas").mkdir(parents=True)
        (data_dir / "tables").mkdir()
        (data_dir / "personas" / "alice.txt").write_text(PERSONA_TEXT, "utf-8")
        tables, _meta = make_synthetic_tables(seed=11, days=60)
        (data_dir / "tables" / "alice.json").write_text(
            json.dumps(tables_to_wire(tables)), "utf-8"
        )

        record(
            "pha-knowledge",
            pha_knowledge_handlers(),
            "pha",
            [STREP_QUERY],
        )
        record(
            "pha-sleep-reflection",
            pha_sleep_handlers(),
            "pha",
            [SLEEP_QUERY],
            persona_id="alice",
            data_dir=data_dir,
        )
        record("parallel-compare", parallel_handlers(), "parallel", [STREP_QUERY])
        record(
            "single-baseline",
            single_handlers(),
            "single",
            [STREP_QUERY, "Should I still rest once antibiotics start?"],
        )
        record(
            "pha-fallback-then-finish",
            fallback_then_finish_handlers(),
            "pha",
            [CORNER_QUERY, SLEEP_QUERY],
        )


if __name__ == "__main__":
    main()
