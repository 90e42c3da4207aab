/** Wire contracts published by the health-agents HTTP service.
 *
 * These mirror the service's JSON exactly; the view-model layer is the
 * place that tolerates missing or malformed fields, so everything here
 * describes the shape a healthy service emits.
 */

export type Mode = "pha" | "parallel" | "single";

export const MODES: readonly Mode[] = ["pha", "parallel", "single"];

export interface SessionDescriptor {
  session_id: string;
  mode: Mode;
  persona_id: string;
  created_at: string;
  status: "open" | "ended";
}

export interface RoutingWire {
  main: string;
  supporting: string[];
  workflow: string;
  source: string;
}

export interface ExchangeWire {
  agent: string;
  sub_query: string;
  response: string;
  role: string;
}

export interface ReflectionRoundWire {
  decision: string;
  questions: [string, string][];
  insights: [string, string][];
  revised_response: string;
}

export interface MemoryEntryWire {
  turn_id: number;
  kind: string;
  agent_source: string;
  text: string;
}

export interface TurnWire {
  turn_id: number;
  user_message: string;
  mode: string;
  reply: string;
  label: string;
  routing: RoutingWire | null;
  rephrased: [string, string][];
  rephrase_fallback: boolean;
  exchanges: ExchangeWire[];
  reflection_rounds: ReflectionRoundWire[];
  memory_entries: MemoryEntryWire[];
  memory_flagged: boolean;
  llm_calls: number;
  wall_time: number;
  notes: string[];
}

export interface TraceWire {
  session_id: string;
  mode: string;
  persona_id: string;
  turns: TurnWire[];
}

export interface PersonaSummary {
  id: string;
  demographics: [string, string][];
  conditions: [string, string][];
  goal: string;
  has_tables: boolean;
}

export interface MessageResponse {
  reply: string;
  turn_id: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

/** One server-sent event from GET /sessions/{id}/events. */
export interface TurnEvent {
  event: string;
  data: Record<string, unknown>;
}

export interface TurnStartedData {
  turn_id: number;
  mode: string;
  text: string;
}

export interface AgentInvokedData {
  turn_id: number;
  agent: string;
  role: string;
  sub_query: string;
}

export interface ReflectionRoundData {
  turn_id: number;
  round: number;
  decision: string;
}

export interface TurnCompletedData {
  turn_id: number;
  reply: string;
  llm_calls: number;
  wall_time: number;
  status: "open" | "ended";
}
