import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderApp,
  renderComposer,
  renderError,
  renderInspector,
  renderModeBadge,
  renderTurn,
} from "../src/render.js";
import { initialState, reduce, replay, type AppState } from "../src/state.js";
import { turnView } from "../src/viewmodel.js";
import { loadFixture } from "./helpers.js";

function stateFor(name: string): AppState {
  const fixture = loadFixture(name);
  return replay([
    { kind: "personas_loaded", personas: fixture.personas },
    { kind: "session_created", descriptor: fixture.descriptor },
    { kind: "trace_loaded", trace: fixture.trace },
  ]);
}

describe("markup safety", () => {
  it("escapes html in all rendered text", () => {
    const view = turnView({
      turn_id: 1,
      user_message: "<script>alert(1)</script>",
      reply: 'a "quoted" <b>reply</b>',
    });
    const html = renderTurn(view, true);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
    expect(html).toContain("&quot;quoted&quot;");
  });

  it("escapes the five reserved characters", () => {
    expect(escapeHtml(`&<>"'`)).toBe("&amp;&lt;&gt;&quot;&#39;");
  });
});

describe("inspector", () => {
  it("shows the cost slice as a model-call label", () => {
    const html = renderInspector(turnView({ llm_calls: 5 }));
    expect(html).toContain("5 model calls");
  });

  it("shows one reflection round for the knowledge fixture", () => {
    const fixture = loadFixture("pha-knowledge");
    const html = renderInspector(turnView(fixture.trace.turns[0]));
    expect(html).toContain("reflection: 1 round");
    expect(html).toContain("6 model calls");
  });

  it("renders routing badges for main and each supporting agent", () => {
    const fixture = loadFixture("pha-sleep-reflection");
    const html = renderInspector(turnView(fixture.trace.turns[0]));
    expect(html).toContain("main: hc");
    expect(html).toContain(`<span class="ha-badge ha-badge-support">ds</span>`);
    expect(html).toContain("reflection: 2 rounds");
  });

  it("renders two sub-query panes for the hc+ds turn", () => {
    const fixture = loadFixture("pha-sleep-reflection");
    const html = renderInspector(turnView(fixture.trace.turns[0]));
    expect(html.match(/class="ha-pane /g)).toHaveLength(2);
    expect(html).toContain("ha-pane-supporting");
    expect(html).toContain("ha-pane-main");
  });

  it("labels missing fields unavailable instead of hiding them", () => {
    const html = renderInspector(turnView({}));
    expect(html).toContain("routing unavailable");
    expect(html).toContain("cost: <strong>unavailable</strong>");
  });
});

describe("chat surface", () => {
  it("shows the fallback notice on fallback turns", () => {
    const fixture = loadFixture("pha-fallback-then-finish");
    const html = renderTurn(turnView(fixture.trace.turns[0]), false);
    expect(html).toContain("outside supported topics");
    expect(html).toContain("ha-fallback-notice");
  });

  it("renders a mode badge per mode", () => {
    expect(renderModeBadge("parallel")).toContain("ha-mode-parallel");
    expect(stateFor("parallel-compare") && renderApp(stateFor("parallel-compare"))).toContain(
      `ha-badge-mode ha-mode-parallel">parallel</span>`,
    );
  });

  it("disables send on empty input and while a turn is in flight", () => {
    let state = stateFor("pha-knowledge");
    expect(renderComposer(state)).toContain("<button type=\"submit\" disabled>");
    state = reduce(state, { kind: "draft_changed", text: "hello" });
    expect(renderComposer(state)).toContain("<button type=\"submit\" >");
    state = reduce(state, { kind: "send_requested" });
    expect(state.busy).toBe(true);
    expect(renderComposer(state)).toContain("<button type=\"submit\" disabled>");
    expect(renderComposer(state)).toContain("disabled />");
  });

  it("disables the composer once the session has ended", () => {
    const state = stateFor("pha-fallback-then-finish");
    const html = renderComposer(state);
    expect(html).toContain("session concluded");
    expect(html).toContain("disabled");
  });

  it("surfaces service errors inline with a dismiss control", () => {
    const html = renderError("unknown_persona (404): unknown persona 'bob'");
    expect(html).toContain("role=\"alert\"");
    expect(html).toContain("unknown persona");
    expect(html).toContain("dismiss");
    expect(renderError(null)).toBe("");
  });

  it("shows the polling retry indicator after a stream drop", () => {
    let state = stateFor("pha-knowledge");
    state = reduce(state, { kind: "stream_connected" });
    expect(renderApp(state)).toContain("live stream");
    state = reduce(state, { kind: "stream_dropped" });
    const html = renderApp(state);
    expect(html).toContain("polling");
    expect(html).toContain("stream dropped");
  });

  it("renders progress steps for in-flight lifecycle events", () => {
    const fixture = loadFixture("pha-sleep-reflection");
    let state = stateFor("pha-sleep-reflection");
    state = reduce(state, { kind: "draft_changed", text: "q" });
    state = reduce(state, { kind: "send_requested" });
    for (const event of fixture.events.slice(0, 4)) {
      state = reduce(state, { kind: "turn_event", event });
    }
    const html = renderApp(state);
    expect(html).toContain("ds invoked (supporting)");
    expect(html).toContain("reflection round 1");
    expect(html).toContain("working…");
  });

  it("renders an empty shell before any session exists", () => {
    expect(renderApp(initialState())).toMatchSnapshot();
  });
});
