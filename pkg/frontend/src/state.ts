/** Application state as a fold over service responses and stream events.
 *
 * The reducer is the only writer: every network payload, SSE event, and
 * user intent becomes an action, so the rendered UI is a pure function
 * of the action history.  Presentation-only toggles (which inspector is
 * expanded, the composer draft) live here too but never feed back into
 * what the service data means.
 */

import type {
  PersonaSummary,
  SessionDescriptor,
  TraceWire,
  TurnEvent,
} from "./types.js";

export type Transport = "idle" | "stream" | "polling";

export interface ProgressStep {
  label: string;
  detail: string;
}

export interface AppState {
  personas: PersonaSummary[];
  descriptor: SessionDescriptor | null;
  trace: TraceWire | null;
  /** a send is in flight; the composer stays disabled until it settles */
  busy: boolean;
  draft: string;
  progress: ProgressStep[];
  transport: Transport;
  retrying: boolean;
  error: string | null;
  expandedTurns: number[];
  /** events consumed from the session stream, the replay cursor */
  eventCursor: number;
}

export type Action =
  | { kind: "personas_loaded"; personas: PersonaSummary[] }
  | { kind: "session_created"; descriptor: SessionDescriptor }
  | { kind: "draft_changed"; text: string }
  | { kind: "send_requested" }
  | { kind: "send_settled" }
  | { kind: "send_failed"; message: string }
  | { kind: "turn_event"; event: TurnEvent }
  | { kind: "trace_loaded"; trace: TraceWire }
  | { kind: "stream_connected" }
  | { kind: "stream_dropped" }
  | { kind: "poll_started" }
  | { kind: "toggle_turn"; turnId: number }
  | { kind: "error"; message: string }
  | { kind: "error_cleared" };

export function initialState(): AppState {
  return {
    personas: [],
    descriptor: null,
    trace: null,
    busy: false,
    draft: "",
    progress: [],
    transport: "idle",
    retrying: false,
    error: null,
    expandedTurns: [],
    eventCursor: 0,
  };
}

/** Empty input or an in-flight turn disables sending; so does a missing
 * or ended session. */
export function canSend(state: AppState): boolean {
  return (
    !state.busy &&
    state.draft.trim() !== "" &&
    state.descriptor !== null &&
    state.descriptor.status === "open"
  );
}

function progressStep(event: TurnEvent): ProgressStep | null {
  const data = event.data;
  switch (event.event) {
    case "turn_started":
      return { label: "turn started", detail: String(data.text ?? "") };
    case "agent_invoked":
      return {
        label: `${String(data.agent ?? "agent")} invoked (${String(data.role ?? "?")})`,
        detail: String(data.sub_query ?? ""),
      };
    case "reflection_round":
      return {
        label: `reflection round ${String(data.round ?? "?")}`,
        detail: String(data.decision ?? ""),
      };
    case "turn_completed":
      return { label: "turn completed", detail: String(data.reply ?? "") };
    default:
      return null;
  }
}

export function reduce(state: AppState, action: Action): AppState {
  switch (action.kind) {
    case "personas_loaded":
      return { ...state, personas: action.personas };
    case "session_created":
      return {
        ...state,
        descriptor: action.descriptor,
        trace: null,
        busy: false,
        progress: [],
        error: null,
        expandedTurns: [],
        eventCursor: 0,
        transport: "idle",
        retrying: false,
      };
    case "draft_changed":
      return { ...state, draft: action.text };
    case "send_requested":
      return canSend(state)
        ? { ...state, busy: true, progress: [], error: null, draft: "" }
        : state;
    case "send_settled":
      return { ...state, busy: false, progress: [], retrying: false };
    case "send_failed":
      return {
        ...state,
        busy: false,
        progress: [],
        retrying: false,
        error: action.message,
      };
    case "turn_event": {
      const step = progressStep(action.event);
      const ended =
        action.event.event === "turn_completed" &&
        action.event.data.status === "ended";
      return {
        ...state,
        eventCursor: state.eventCursor + 1,
        progress: step ? [...state.progress, step] : state.progress,
        descriptor:
          ended && state.descriptor
            ? { ...state.descriptor, status: "ended" }
            : state.descriptor,
      };
    }
    case "trace_loaded":
      return { ...state, trace: action.trace };
    case "stream_connected":
      return { ...state, transport: "stream", retrying: false };
    case "stream_dropped":
      return { ...state, transport: "polling", retrying: true };
    case "poll_started":
      return { ...state, transport: "polling" };
    case "toggle_turn": {
      const expanded = state.expandedTurns.includes(action.turnId)
        ? state.expandedTurns.filter((id) => id !== action.turnId)
        : [...state.expandedTurns, action.turnId];
      return { ...state, expandedTurns: expanded };
    }
    case "error":
      return { ...state, error: action.message };
    case "error_cleared":
      return { ...state, error: null };
  }
}

export function replay(actions: Action[], start?: AppState): AppState {
  return actions.reduce(reduce, start ?? initialState());
}
