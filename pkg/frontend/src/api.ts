/** Typed client for the health-agents HTTP service.
 *
 * Every request goes to the configured base URL and nowhere else.  A
 * non-2xx response surfaces as ApiRequestError carrying the service's
 * {code, message} body, so callers render it instead of dropping it.
 * The fetch implementation is injectable for tests.
 */

import { SseParser } from "./sse.js";
import type {
  MessageResponse,
  PersonaSummary,
  SessionDescriptor,
  TraceWire,
  TurnEvent,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

/** Polling fallback cadence: 1s base plus up to 250ms jitter. */
export function pollDelay(rng: () => number = Math.random): number {
  return 1000 + Math.floor(rng() * 250);
}

export class ApiClient {
  private readonly baseUrl: string;

  constructor(
    baseUrl: string,
    private readonly token = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private headers(json: boolean): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(
    path: string,
    init: RequestInit = {},
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) throw await toError(response);
    return (await response.json()) as T;
  }

  personas(): Promise<PersonaSummary[]> {
    return this.request("/personas", { headers: this.headers(false) });
  }

  sessions(): Promise<SessionDescriptor[]> {
    return this.request("/sessions", { headers: this.headers(false) });
  }

  createSession(mode: string, personaId: string): Promise<SessionDescriptor> {
    return this.request("/sessions", {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({ mode, persona_id: personaId }),
    });
  }

  trace(sessionId: string): Promise<TraceWire> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/trace`, {
      headers: this.headers(false),
    });
  }

  sendMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/messages`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({ text }),
    });
  }

  /** Follow the session event stream from the `after` cursor, invoking
   * onEvent per event until the stream ends or the signal aborts.
   * Network failures reject; the caller decides to fall back to polling. */
  async streamEvents(
    sessionId: string,
    after: number,
    onEvent: (event: TurnEvent) => void,
    signal?: AbortSignal,
    maxEvents?: number,
  ): Promise<void> {
    const params = new URLSearchParams({ after: String(after) });
    if (maxEvents !== undefined) params.set("max_events", String(maxEvents));
    const path = `/sessions/${encodeURIComponent(sessionId)}/events?${params}`;
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: this.headers(false),
      signal,
    });
    if (!response.ok) throw await toError(response);
    if (!response.body) throw new ApiRequestError(0, "internal", "no stream body");
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      for (const event of parser.feed(decoder.decode(value, { stream: true }))) {
        onEvent(event);
      }
    }
  }
}

async function toError(response: Response): Promise<ApiRequestError> {
  let code = "internal";
  let message = `request failed with status ${response.status}`;
  try {
    const body = (await response.json()) as Record<string, unknown>;
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiRequestError(response.status, code, message);
}
