/** Pure projections from service JSON to render-ready view structures.
 *
 * Every reader is defensive: a missing or mistyped trace field renders
 * as "unavailable" instead of throwing, and nothing here infers routing
 * or any other fact the trace does not state.  Inputs are the raw
 * payloads of GET /sessions/{id}/trace, GET /personas, and the session
 * descriptor; outputs are plain serializable objects, so snapshot tests
 * can pin the whole projection.
 */

import type { PersonaSummary, SessionDescriptor, TraceWire } from "./types.js";

export const UNAVAILABLE = "unavailable";

export const FALLBACK_NOTICE =
  "This question was outside supported topics, so a plain assistant answered it.";

export interface RoutingView {
  main: string;
  supporting: string[];
  workflow: string;
  source: string;
  fallback: boolean;
}

export interface SubQueryPane {
  agent: string;
  role: string;
  subQuery: string;
  response: string;
}

export interface ReflectionView {
  round: number;
  decision: string;
  questions: { agent: string; question: string }[];
  insights: { agent: string; insight: string }[];
  revisedResponse: string;
}

export interface MemoryView {
  kind: string;
  text: string;
}

export interface TurnView {
  turnId: number | null;
  userText: string;
  replyText: string;
  label: string;
  routing: RoutingView | null;
  panes: SubQueryPane[];
  reflections: ReflectionView[];
  reflectionRounds: number;
  memory: MemoryView[];
  notes: string[];
  llmCalls: number | null;
  wallTime: number | null;
  costLabel: string;
  wallTimeLabel: string;
  fallbackNotice: string | null;
}

export interface PersonaView {
  id: string;
  demographics: { field: string; value: string }[];
  conditions: { field: string; value: string }[];
  goal: string;
  hasTables: boolean;
}

export interface SessionView {
  sessionId: string;
  mode: string;
  personaId: string;
  status: string;
  ended: boolean;
  turns: TurnView[];
  persona: PersonaView | null;
}

function asRecord(value: unknown): Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value)
    ? (value as Record<string, unknown>)
    : {};
}

function asArray(value: unknown): unknown[] {
  return Array.isArray(value) ? value : [];
}

function text(value: unknown, fallback = UNAVAILABLE): string {
  return typeof value === "string" && value !== "" ? value : fallback;
}

function count(value: unknown): number | null {
  return typeof value === "number" && Number.isFinite(value) ? value : null;
}

function pair(value: unknown): [string, string] {
  const items = asArray(value);
  return [text(items[0]), text(items[1], "")];
}

export function costLabel(calls: unknown): string {
  const n = count(calls);
  if (n === null || n < 0) return UNAVAILABLE;
  return n === 1 ? "1 model call" : `${n} model calls`;
}

export function wallTimeLabel(seconds: unknown): string {
  const n = count(seconds);
  if (n === null || n < 0) return UNAVAILABLE;
  return `${n.toFixed(2)}s`;
}

export function routingView(raw: unknown): RoutingView | null {
  if (raw === null || raw === undefined) return null;
  const record = asRecord(raw);
  const source = text(record.source);
  return {
    main: text(record.main),
    supporting: asArray(record.supporting).map((agent) => text(agent)),
    workflow: text(record.workflow, ""),
    source,
    fallback: source === "fallback",
  };
}

export function turnView(raw: unknown): TurnView {
  const turn = asRecord(raw);
  const routing = routingView(turn.routing);
  const reflections = asArray(turn.reflection_rounds).map((round, index) => {
    const record = asRecord(round);
    return {
      round: index + 1,
      decision: text(record.decision),
      questions: asArray(record.questions).map((entry) => {
        const [agent, question] = pair(entry);
        return { agent, question };
      }),
      insights: asArray(record.insights).map((entry) => {
        const [agent, insight] = pair(entry);
        return { agent, insight };
      }),
      revisedResponse: text(record.revised_response, ""),
    };
  });
  return {
    turnId: count(turn.turn_id),
    userText: text(turn.user_message),
    replyText: text(turn.reply),
    label: text(turn.label, ""),
    routing,
    panes: asArray(turn.exchanges).map((exchange) => {
      const record = asRecord(exchange);
      return {
        agent: text(record.agent),
        role: text(record.role),
        subQuery: text(record.sub_query),
        response: text(record.response),
      };
    }),
    reflections,
    reflectionRounds: reflections.length,
    memory: asArray(turn.memory_entries).map((entry) => {
      const record = asRecord(entry);
      return { kind: text(record.kind), text: text(record.text) };
    }),
    notes: asArray(turn.notes).map((note) => text(note)),
    llmCalls: count(turn.llm_calls),
    wallTime: count(turn.wall_time),
    costLabel: costLabel(turn.llm_calls),
    wallTimeLabel: wallTimeLabel(turn.wall_time),
    fallbackNotice: routing?.fallback ? FALLBACK_NOTICE : null,
  };
}

export function personaView(raw: unknown): PersonaView {
  const record = asRecord(raw);
  const rows = (value: unknown) =>
    asArray(value).map((entry) => {
      const [field, item] = pair(entry);
      return { field, value: item };
    });
  return {
    id: text(record.id),
    demographics: rows(record.demographics),
    conditions: rows(record.conditions),
    goal: text(record.goal),
    hasTables: record.has_tables === true,
  };
}

/** Assemble the full session view from the service payloads the UI holds.
 * Turn order follows ascending turn_id regardless of payload order. */
export function sessionView(
  descriptor: SessionDescriptor | Record<string, unknown> | null,
  trace: TraceWire | Record<string, unknown> | null,
  personas: PersonaSummary[] | unknown[] = [],
): SessionView {
  const head = asRecord(descriptor);
  const body = asRecord(trace);
  const personaId = text(head.persona_id ?? body.persona_id, "");
  const persona = asArray(personas)
    .map(personaView)
    .find((candidate) => candidate.id === personaId && personaId !== "");
  const turns = asArray(body.turns)
    .map(turnView)
    .sort((a, b) => (a.turnId ?? 0) - (b.turnId ?? 0));
  const status = text(head.status, "open");
  return {
    sessionId: text(head.session_id ?? body.session_id),
    mode: text(head.mode ?? body.mode),
    personaId,
    status,
    ended: status === "ended",
    turns,
    persona: persona ?? null,
  };
}
