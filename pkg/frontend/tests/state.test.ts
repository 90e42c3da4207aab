import { describe, expect, it } from "vitest";

import { canSend, initialState, reduce, replay, type Action } from "../src/state.js";
import type { SessionDescriptor } from "../src/types.js";
import { loadFixture } from "./helpers.js";

const DESCRIPTOR: SessionDescriptor = {
  session_id: "s1",
  mode: "pha",
  persona_id: "",
  created_at: "2026-08-16T00:00:00Z",
  status: "open",
};

function openSession(): Action[] {
  return [
    { kind: "session_created", descriptor: DESCRIPTOR },
    { kind: "draft_changed", text: "hello" },
  ];
}

describe("send gating", () => {
  it("requires an open session and a non-blank draft", () => {
    let state = initialState();
    expect(canSend(state)).toBe(false);
    state = reduce(state, { kind: "session_created", descriptor: DESCRIPTOR });
    expect(canSend(state)).toBe(false);
    state = reduce(state, { kind: "draft_changed", text: "   " });
    expect(canSend(state)).toBe(false);
    state = reduce(state, { kind: "draft_changed", text: "hi" });
    expect(canSend(state)).toBe(true);
  });

  it("allows one active send per session", () => {
    let state = replay(openSession());
    state = reduce(state, { kind: "send_requested" });
    expect(state.busy).toBe(true);
    expect(state.draft).toBe("");
    const again = reduce(
      reduce(state, { kind: "draft_changed", text: "next" }),
      { kind: "send_requested" },
    );
    expect(again.draft).toBe("next"); // second send refused while busy
    expect(canSend(again)).toBe(false);
  });

  it("refuses sends on ended sessions", () => {
    let state = replay(openSession());
    state = reduce(state, {
      kind: "session_created",
      descriptor: { ...DESCRIPTOR, status: "ended" },
    });
    state = reduce(state, { kind: "draft_changed", text: "hi" });
    expect(canSend(state)).toBe(false);
  });

  it("settles busy on success and on failure, keeping the error visible", () => {
    let state = replay(openSession());
    state = reduce(state, { kind: "send_requested" });
    const ok = reduce(state, { kind: "send_settled" });
    expect(ok.busy).toBe(false);
    expect(ok.error).toBeNull();
    const failed = reduce(state, { kind: "send_failed", message: "busy (409)" });
    expect(failed.busy).toBe(false);
    expect(failed.error).toBe("busy (409)");
  });
});

describe("turn lifecycle events", () => {
  it("accumulates progress steps and advances the event cursor", () => {
    const fixture = loadFixture("pha-knowledge");
    let state = replay([
      { kind: "session_created", descriptor: fixture.descriptor },
    ]);
    for (const event of fixture.events) {
      state = reduce(state, { kind: "turn_event", event });
    }
    expect(state.eventCursor).toBe(fixture.events.length);
    expect(state.progress.map((step) => step.label)).toEqual([
      "turn started",
      "de invoked (main)",
      "reflection round 1",
      "turn completed",
    ]);
  });

  it("flips the descriptor to ended when a turn concludes the session", () => {
    const fixture = loadFixture("pha-fallback-then-finish");
    let state = replay([
      { kind: "session_created", descriptor: fixture.created },
    ]);
    expect(state.descriptor?.status).toBe("open");
    for (const event of fixture.events) {
      state = reduce(state, { kind: "turn_event", event });
    }
    expect(state.descriptor?.status).toBe("ended");
  });
});

describe("transport fallback", () => {
  it("switches to polling with a retry notice when the stream drops", () => {
    let state = replay(openSession());
    state = reduce(state, { kind: "stream_connected" });
    expect(state.transport).toBe("stream");
    expect(state.retrying).toBe(false);
    state = reduce(state, { kind: "stream_dropped" });
    expect(state.transport).toBe("polling");
    expect(state.retrying).toBe(true);
    state = reduce(state, { kind: "stream_connected" });
    expect(state.transport).toBe("stream");
    expect(state.retrying).toBe(false);
  });
});

describe("purity", () => {
  it("same action history, same state", () => {
    const fixture = loadFixture("parallel-compare");
    const actions: Action[] = [
      { kind: "personas_loaded", personas: fixture.personas },
      { kind: "session_created", descriptor: fixture.descriptor },
      ...fixture.events.map((event): Action => ({ kind: "turn_event", event })),
      { kind: "trace_loaded", trace: fixture.trace },
    ];
    expect(replay(actions)).toEqual(replay(actions));
  });

  it("never mutates the previous state", () => {
    const before = replay(openSession());
    const frozen = JSON.parse(JSON.stringify(before));
    reduce(before, { kind: "send_requested" });
    reduce(before, { kind: "toggle_turn", turnId: 1 });
    expect(before).toEqual(frozen);
  });
});
