/** Incremental parser for a text/event-stream byte feed.
 *
 * Feed it decoded chunks in any split; it emits complete events and
 * buffers partial lines.  Comment lines (keep-alives) are dropped, and
 * an event fires on the blank line that terminates it, per the SSE
 * framing rules.
 */

import type { TurnEvent } from "./types.js";

export class SseParser {
  private buffer = "";
  private eventType = "";
  private dataLines: string[] = [];

  /** Parse a chunk; returns the events completed by it. */
  feed(chunk: string): TurnEvent[] {
    this.buffer += chunk;
    const events: TurnEvent[] = [];
    for (;;) {
      const newline = this.buffer.indexOf("\n");
      if (newline === -1) break;
      let line = this.buffer.slice(0, newline);
      this.buffer = this.buffer.slice(newline + 1);
      if (line.endsWith("\r")) line = line.slice(0, -1);
      const event = this.consumeLine(line);
      if (event) events.push(event);
    }
    return events;
  }

  private consumeLine(line: string): TurnEvent | null {
    if (line === "") return this.flush();
    if (line.startsWith(":")) return null; // keep-alive comment
    const colon = line.indexOf(":");
    const field = colon === -1 ? line : line.slice(0, colon);
    let value = colon === -1 ? "" : line.slice(colon + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "event") this.eventType = value;
    else if (field === "data") this.dataLines.push(value);
    return null;
  }

  private flush(): TurnEvent | null {
    if (this.dataLines.length === 0 && this.eventType === "") return null;
    const raw = this.dataLines.join("\n");
    const type = this.eventType || "message";
    this.eventType = "";
    this.dataLines = [];
    if (raw === "") return null;
    try {
      const data = JSON.parse(raw) as Record<string, unknown>;
      return { event: type, data };
    } catch {
      return null; // malformed payload; skip rather than poison the stream
    }
  }
}

/** Parse a whole buffered stream body (e.g. a bounded replay). */
export function parseStream(body: string): TurnEvent[] {
  const parser = new SseParser();
  return parser.feed(body.endsWith("\n") ? body : `${body}\n`);
}
