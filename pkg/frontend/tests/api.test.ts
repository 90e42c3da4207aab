import { describe, expect, it } from "vitest";

import { ApiClient, ApiRequestError, pollDelay } from "../src/api.js";
import type { TurnEvent } from "../src/types.js";

interface Recorded {
  url: string;
  init?: RequestInit;
}

function stub(responses: Response[]): { calls: Recorded[]; fetch: typeof fetch } {
  const calls: Recorded[] = [];
  const impl = (async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    const next = responses.shift();
    if (!next) throw new Error("unexpected request");
    return next;
  }) as unknown as typeof fetch;
  return { calls, fetch: impl };
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("request shaping", () => {
  it("targets only the configured base url and strips trailing slashes", async () => {
    const { calls, fetch } = stub([json(200, []), json(200, [])]);
    const client = new ApiClient("http://svc:8000///", "", fetch);
    await client.personas();
    await client.sessions();
    expect(calls.map((call) => call.url)).toEqual([
      "http://svc:8000/personas",
      "http://svc:8000/sessions",
    ]);
  });

  it("sends the bearer token on every request when configured", async () => {
    const { calls, fetch } = stub([json(200, [])]);
    await new ApiClient("/api", "sesame", fetch).personas();
    const headers = calls[0]?.init?.headers as Record<string, string>;
    expect(headers.Authorization).toBe("Bearer sesame");
  });

  it("omits the auth header without a token", async () => {
    const { calls, fetch } = stub([json(200, [])]);
    await new ApiClient("/api", "", fetch).personas();
    const headers = calls[0]?.init?.headers as Record<string, string>;
    expect(headers.Authorization).toBeUndefined();
  });

  it("posts session creation and messages as json", async () => {
    const { calls, fetch } = stub([
      json(201, { session_id: "s1" }),
      json(200, { reply: "ok", turn_id: 1 }),
    ]);
    const client = new ApiClient("/api", "", fetch);
    await client.createSession("parallel", "alice");
    await client.sendMessage("s 1", "hello");
    expect(calls[0]?.init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      mode: "parallel",
      persona_id: "alice",
    });
    expect(calls[1]?.url).toBe("/api/sessions/s%201/messages");
    expect(JSON.parse(String(calls[1]?.init?.body))).toEqual({ text: "hello" });
  });
});

describe("error surfacing", () => {
  it("carries the service error code and message", async () => {
    const { fetch } = stub([
      json(409, { code: "busy", message: "session is processing a message" }),
    ]);
    const error = await new ApiClient("/api", "", fetch)
      .sendMessage("s1", "x")
      .catch((caught: unknown) => caught);
    expect(error).toBeInstanceOf(ApiRequestError);
    expect((error as ApiRequestError).status).toBe(409);
    expect((error as ApiRequestError).code).toBe("busy");
    expect((error as ApiRequestError).message).toContain("processing");
  });

  it("maps a non-json error body to a generic internal error", async () => {
    const { fetch } = stub([new Response("boom", { status: 502 })]);
    const error = await new ApiClient("/api", "", fetch)
      .personas()
      .catch((caught: unknown) => caught);
    expect((error as ApiRequestError).code).toBe("internal");
    expect((error as ApiRequestError).status).toBe(502);
  });
});

describe("event stream", () => {
  const FRAMES =
    'event: turn_started\ndata: {"turn_id": 1}\n\n' +
    ": keep-alive\n\n" +
    'event: turn_completed\ndata: {"turn_id": 1, "reply": "done"}\n\n';

  function streamResponse(chunks: string[], fail = false): Response {
    const encoder = new TextEncoder();
    const body = new ReadableStream<Uint8Array>({
      start(controller) {
        for (const chunk of chunks) controller.enqueue(encoder.encode(chunk));
        if (fail) controller.error(new Error("connection reset"));
        else controller.close();
      },
    });
    return new Response(body, { status: 200 });
  }

  it("delivers parsed events and passes the replay cursor", async () => {
    const { calls, fetch } = stub([streamResponse([FRAMES])]);
    const seen: TurnEvent[] = [];
    await new ApiClient("/api", "", fetch).streamEvents(
      "s1",
      3,
      (event) => seen.push(event),
      undefined,
      2,
    );
    expect(calls[0]?.url).toBe("/api/sessions/s1/events?after=3&max_events=2");
    expect(seen.map((event) => event.event)).toEqual([
      "turn_started",
      "turn_completed",
    ]);
    expect(seen[1]?.data.reply).toBe("done");
  });

  it("handles chunk boundaries inside a frame", async () => {
    const { fetch } = stub([
      streamResponse([FRAMES.slice(0, 17), FRAMES.slice(17)]),
    ]);
    const seen: TurnEvent[] = [];
    await new ApiClient("/api", "", fetch).streamEvents("s1", 0, (event) =>
      seen.push(event),
    );
    expect(seen).toHaveLength(2);
  });

  it("rejects when the stream drops so the caller can fall back to polling", async () => {
    const { fetch } = stub([streamResponse([FRAMES.slice(0, 10)], true)]);
    await expect(
      new ApiClient("/api", "", fetch).streamEvents("s1", 0, () => {}),
    ).rejects.toThrow("connection reset");
  });

  it("rejects on an http error with the service code", async () => {
    const { fetch } = stub([
      json(404, { code: "unknown_session", message: "no such session" }),
    ]);
    await expect(
      new ApiClient("/api", "", fetch).streamEvents("nope", 0, () => {}),
    ).rejects.toMatchObject({ code: "unknown_session", status: 404 });
  });
});

describe("polling cadence", () => {
  it("spaces polls one second apart with up to 250ms of jitter", () => {
    expect(pollDelay(() => 0)).toBe(1000);
    expect(pollDelay(() => 0.9999)).toBe(1249);
    for (let i = 0; i < 50; i += 1) {
      const delay = pollDelay();
      expect(delay).toBeGreaterThanOrEqual(1000);
      expect(delay).toBeLessThan(1250);
    }
  });
});
