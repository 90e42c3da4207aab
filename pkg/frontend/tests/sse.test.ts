import { describe, expect, it } from "vitest";

import { parseStream, SseParser } from "../src/sse.js";

const FRAME =
  'event: turn_started\ndata: {"turn_id": 1, "mode": "pha", "text": "hi"}\n\n';

describe("sse parser", () => {
  it("parses a complete frame", () => {
    const events = new SseParser().feed(FRAME);
    expect(events).toEqual([
      { event: "turn_started", data: { turn_id: 1, mode: "pha", text: "hi" } },
    ]);
  });

  it("reassembles frames split at arbitrary byte boundaries", () => {
    for (const cut of [1, 7, 20, FRAME.length - 2]) {
      const parser = new SseParser();
      const first = parser.feed(FRAME.slice(0, cut));
      const rest = parser.feed(FRAME.slice(cut));
      expect([...first, ...rest]).toHaveLength(1);
      expect([...first, ...rest][0]?.event).toBe("turn_started");
    }
  });

  it("handles several events in one chunk and keeps order", () => {
    const body =
      'event: a\ndata: {"n": 1}\n\nevent: b\ndata: {"n": 2}\n\n';
    expect(new SseParser().feed(body).map((e) => e.event)).toEqual(["a", "b"]);
  });

  it("ignores keep-alive comments and blank noise", () => {
    const body = `: keep-alive\n\n: keep-alive\n\n${FRAME}`;
    expect(new SseParser().feed(body)).toHaveLength(1);
  });

  it("tolerates crlf line endings", () => {
    const body = FRAME.replaceAll("\n", "\r\n");
    expect(new SseParser().feed(body)).toHaveLength(1);
  });

  it("skips malformed payloads without poisoning later events", () => {
    const body = `event: x\ndata: {broken\n\n${FRAME}`;
    const events = new SseParser().feed(body);
    expect(events).toHaveLength(1);
    expect(events[0]?.event).toBe("turn_started");
  });

  it("parses a whole buffered replay body", () => {
    const body = FRAME + 'event: turn_completed\ndata: {"turn_id": 1}\n\n';
    expect(parseStream(body).map((e) => e.event)).toEqual([
      "turn_started",
      "turn_completed",
    ]);
  });
});
