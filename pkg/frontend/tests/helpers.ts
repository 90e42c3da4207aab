import { readFileSync } from "node:fs";

import type {
  PersonaSummary,
  SessionDescriptor,
  TraceWire,
  TurnEvent,
} from "../src/types.js";

export interface Fixture {
  name: string;
  personas: PersonaSummary[];
  created: SessionDescriptor;
  descriptor: SessionDescriptor;
  messages: { text: string; response: { reply: string; turn_id: number } }[];
  events: TurnEvent[];
  trace: TraceWire;
}

export const FIXTURE_NAMES = [
  "pha-knowledge",
  "pha-sleep-reflection",
  "parallel-compare",
  "single-baseline",
  "pha-fallback-then-finish",
] as const;

export function loadFixture(name: string): Fixture {
  const url = new URL(`./fixtures/${name}.json`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as Fixture;
}
