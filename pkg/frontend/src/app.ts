/** DOM controller: wires user intents and service responses into the
 * reducer and repaints from the pure renderer.
 *
 * One send can be active per session; the composer is disabled while a
 * turn is in flight.  Turn lifecycle updates arrive over the event
 * stream when it holds, and over 1s-jittered trace polling when it
 * drops, with a visible retry indicator.
 */

import { ApiClient, ApiRequestError, pollDelay } from "./api.js";
import { renderApp } from "./render.js";
import type { Action, AppState } from "./state.js";
import { canSend, initialState, reduce } from "./state.js";

const RECONNECT_DELAY_MS = 5000;

export class App {
  private state: AppState = initialState();
  private client: ApiClient | null = null;
  private streamAbort: AbortController | null = null;
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  private generation = 0;

  constructor(
    private readonly root: HTMLElement,
    private readonly makeClient: (token: string) => ApiClient,
  ) {
    this.root.addEventListener("submit", (event) => this.onSubmit(event));
    this.root.addEventListener("click", (event) => this.onClick(event));
    this.root.addEventListener("input", (event) => this.onInput(event));
    this.paint();
  }

  private dispatch(action: Action): void {
    this.state = reduce(this.state, action);
    if (action.kind !== "draft_changed") this.paint();
  }

  private paint(): void {
    this.root.innerHTML = renderApp(this.state);
  }

  private onSubmit(event: Event): void {
    const form = event.target as HTMLFormElement;
    const action = form.dataset.action;
    if (!action) return;
    event.preventDefault();
    if (action === "start") {
      const data = new FormData(form);
      void this.start(
        String(data.get("persona") ?? ""),
        String(data.get("mode") ?? "pha"),
        String(data.get("token") ?? ""),
      );
    } else if (action === "send") {
      void this.send();
    }
  }

  private onClick(event: Event): void {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!(target instanceof HTMLElement)) return;
    if (target.dataset.action === "toggle-turn") {
      this.dispatch({
        kind: "toggle_turn",
        turnId: Number(target.dataset.turnId ?? 0),
      });
    } else if (target.dataset.action === "dismiss-error") {
      this.dispatch({ kind: "error_cleared" });
    }
  }

  private onInput(event: Event): void {
    const input = event.target as HTMLInputElement;
    if (input.name !== "message") return;
    this.dispatch({ kind: "draft_changed", text: input.value });
    const button = this.root.querySelector<HTMLButtonElement>(
      ".ha-composer button",
    );
    if (button) button.disabled = !canSend(this.state);
  }

  async start(personaId: string, mode: string, token: string): Promise<void> {
    this.stopTransports();
    const generation = ++this.generation;
    this.client = this.makeClient(token);
    try {
      const personas = await this.client.personas();
      if (generation !== this.generation) return;
      this.dispatch({ kind: "personas_loaded", personas });
      const descriptor = await this.client.createSession(mode, personaId);
      if (generation !== this.generation) return;
      this.dispatch({ kind: "session_created", descriptor });
      this.dispatch({ kind: "trace_loaded", trace: await this.client.trace(descriptor.session_id) });
      this.openStream(generation);
    } catch (error) {
      this.dispatch({ kind: "error", message: describe(error) });
    }
  }

  async send(): Promise<void> {
    if (!this.client || !this.state.descriptor || !canSend(this.state)) return;
    const text = this.state.draft.trim();
    const sessionId = this.state.descriptor.session_id;
    this.dispatch({ kind: "send_requested" });
    try {
      await this.client.sendMessage(sessionId, text);
      const trace = await this.client.trace(sessionId);
      this.dispatch({ kind: "trace_loaded", trace });
      this.dispatch({ kind: "send_settled" });
    } catch (error) {
      this.dispatch({ kind: "send_failed", message: describe(error) });
    }
  }

  private openStream(generation: number): void {
    if (!this.client || !this.state.descriptor) return;
    const sessionId = this.state.descriptor.session_id;
    this.streamAbort = new AbortController();
    this.dispatch({ kind: "stream_connected" });
    this.client
      .streamEvents(
        sessionId,
        this.state.eventCursor,
        (event) => this.dispatch({ kind: "turn_event", event }),
        this.streamAbort.signal,
      )
      .catch(() => {
        if (generation !== this.generation) return;
        this.dispatch({ kind: "stream_dropped" });
        this.schedulePoll(generation);
        setTimeout(() => {
          if (generation === this.generation) this.openStream(generation);
        }, RECONNECT_DELAY_MS);
      });
  }

  private schedulePoll(generation: number): void {
    if (this.pollTimer) return;
    const tick = async () => {
      this.pollTimer = null;
      if (generation !== this.generation) return;
      if (this.state.transport !== "polling") return;
      if (this.client && this.state.descriptor) {
        try {
          const trace = await this.client.trace(this.state.descriptor.session_id);
          this.dispatch({ kind: "trace_loaded", trace });
        } catch {
          // keep polling; the retry indicator is already visible
        }
      }
      this.pollTimer = setTimeout(() => void tick(), pollDelay());
    };
    this.pollTimer = setTimeout(() => void tick(), pollDelay());
  }

  private stopTransports(): void {
    this.streamAbort?.abort();
    this.streamAbort = null;
    if (this.pollTimer) {
      clearTimeout(this.pollTimer);
      this.pollTimer = null;
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiRequestError) {
    return `${error.code} (${error.status}): ${error.message}`;
  }
  return error instanceof Error ? error.message : String(error);
}
