/** HTML renderers: pure functions from view structures to markup strings.
 *
 * No DOM access happens here, so snapshot tests can pin the exact
 * markup produced for recorded service payloads.  Interactive elements
 * carry data-action attributes that the controller wires up after
 * injection.
 */

import type { AppState } from "./state.js";
import { canSend } from "./state.js";
import type { PersonaSummary } from "./types.js";
import { MODES } from "./types.js";
import type {
  PersonaView,
  ReflectionView,
  SessionView,
  SubQueryPane,
  TurnView,
} from "./viewmodel.js";
import { sessionView, UNAVAILABLE } from "./viewmodel.js";

export function escapeHtml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const esc = escapeHtml;

export function renderModeBadge(mode: string): string {
  return `<span class="ha-badge ha-badge-mode ha-mode-${esc(mode)}">${esc(mode)}</span>`;
}

export function renderRoutingBadges(turn: TurnView): string {
  if (!turn.routing) {
    return `<span class="ha-muted">routing ${UNAVAILABLE}</span>`;
  }
  const main = `<span class="ha-badge ha-badge-main">main: ${esc(turn.routing.main)}</span>`;
  const supporting = turn.routing.supporting
    .map((agent) => `<span class="ha-badge ha-badge-support">${esc(agent)}</span>`)
    .join("");
  const source = `<span class="ha-badge ha-badge-source">${esc(turn.routing.source)}</span>`;
  return `${main}${supporting}${source}`;
}

function renderPane(pane: SubQueryPane): string {
  return `<section class="ha-pane ha-pane-${esc(pane.role)}">
  <header><span class="ha-badge">${esc(pane.agent)}</span> <span class="ha-muted">${esc(pane.role)}</span></header>
  <p class="ha-subquery">${esc(pane.subQuery)}</p>
  <p class="ha-response">${esc(pane.response)}</p>
</section>`;
}

function renderReflection(round: ReflectionView): string {
  const questions = round.questions
    .map(
      (entry) =>
        `<li><span class="ha-badge">${esc(entry.agent)}</span> ${esc(entry.question)}</li>`,
    )
    .join("");
  const insights = round.insights
    .map(
      (entry) =>
        `<li><span class="ha-badge">${esc(entry.agent)}</span> ${esc(entry.insight)}</li>`,
    )
    .join("");
  return `<section class="ha-reflection">
  <header>round ${round.round}: <strong>${esc(round.decision)}</strong></header>
  ${questions ? `<ul class="ha-questions">${questions}</ul>` : ""}
  ${insights ? `<ul class="ha-insights">${insights}</ul>` : ""}
  ${round.revisedResponse ? `<p class="ha-revised">${esc(round.revisedResponse)}</p>` : ""}
</section>`;
}

export function renderInspector(turn: TurnView): string {
  const rounds = turn.reflections.map(renderReflection).join("");
  const memory = turn.memory
    .map(
      (entry) =>
        `<li><span class="ha-badge">${esc(entry.kind)}</span> ${esc(entry.text)}</li>`,
    )
    .join("");
  const notes = turn.notes.map((note) => `<li>${esc(note)}</li>`).join("");
  return `<div class="ha-inspector">
  <div class="ha-routing">${renderRoutingBadges(turn)}</div>
  ${turn.panes.length ? `<div class="ha-panes">${turn.panes.map(renderPane).join("")}</div>` : ""}
  <div class="ha-reflections">
    <h4>reflection: ${turn.reflectionRounds} ${turn.reflectionRounds === 1 ? "round" : "rounds"}</h4>
    ${rounds}
  </div>
  ${memory ? `<div class="ha-memory"><h4>memory</h4><ul>${memory}</ul></div>` : ""}
  ${notes ? `<ul class="ha-notes">${notes}</ul>` : ""}
  <div class="ha-cost">cost: <strong>${esc(turn.costLabel)}</strong> · wall time: ${esc(turn.wallTimeLabel)}</div>
</div>`;
}

export function renderTurn(turn: TurnView, expanded: boolean): string {
  const id = turn.turnId ?? 0;
  const notice = turn.fallbackNotice
    ? `<p class="ha-fallback-notice">${esc(turn.fallbackNotice)}</p>`
    : "";
  return `<article class="ha-turn" data-turn-id="${id}">
  <div class="ha-bubble ha-user">${esc(turn.userText)}</div>
  ${notice}
  <div class="ha-bubble ha-reply">${esc(turn.replyText)}</div>
  <button class="ha-inspect" data-action="toggle-turn" data-turn-id="${id}">
    ${expanded ? "hide trace" : "inspect trace"}
  </button>
  ${expanded ? renderInspector(turn) : ""}
</article>`;
}

export function renderPersonaPanel(persona: PersonaView | null): string {
  if (!persona) {
    return `<aside class="ha-persona ha-persona-empty">no persona attached</aside>`;
  }
  const rows = (entries: { field: string; value: string }[]) =>
    entries
      .map(
        (row) =>
          `<tr><th>${esc(row.field)}</th><td>${esc(row.value)}</td></tr>`,
      )
      .join("");
  return `<aside class="ha-persona">
  <h3>${esc(persona.id)}</h3>
  <table class="ha-demographics">${rows(persona.demographics)}</table>
  ${persona.conditions.length ? `<table class="ha-conditions">${rows(persona.conditions)}</table>` : ""}
  <p class="ha-goal">${esc(persona.goal)}</p>
  <p class="ha-tables">${persona.hasTables ? "wearable tables attached" : "no wearable tables"}</p>
</aside>`;
}

export function renderProgress(state: AppState): string {
  if (!state.busy && state.progress.length === 0) return "";
  const steps = state.progress
    .map(
      (step) =>
        `<li><strong>${esc(step.label)}</strong> <span class="ha-muted">${esc(step.detail)}</span></li>`,
    )
    .join("");
  const waiting = state.busy ? `<li class="ha-waiting">working…</li>` : "";
  return `<ol class="ha-progress">${steps}${waiting}</ol>`;
}

export function renderConnection(state: AppState): string {
  if (state.transport === "idle") return "";
  const label = state.transport === "stream" ? "live stream" : "polling";
  const retry = state.retrying
    ? `<span class="ha-retry">stream dropped — retrying via polling</span>`
    : "";
  return `<span class="ha-transport ha-transport-${state.transport}">${label}</span>${retry}`;
}

export function renderError(message: string | null): string {
  if (!message) return "";
  return `<div class="ha-error" role="alert">${esc(message)}
  <button data-action="dismiss-error">dismiss</button></div>`;
}

export function renderComposer(state: AppState): string {
  const view = currentSessionView(state);
  const ended = view?.ended ?? false;
  const disabledInput = state.busy || !state.descriptor || ended;
  const placeholder = ended
    ? "session concluded"
    : state.descriptor
      ? "ask about your health data…"
      : "start a session first";
  return `<form class="ha-composer" data-action="send">
  <input name="message" type="text" autocomplete="off"
    placeholder="${esc(placeholder)}"
    value="${esc(state.draft)}" ${disabledInput ? "disabled" : ""} />
  <button type="submit" ${canSend(state) ? "" : "disabled"}>send</button>
</form>`;
}

export function renderSetup(state: AppState): string {
  const personaOptions = [`<option value="">(no persona)</option>`]
    .concat(
      state.personas.map(
        (persona: PersonaSummary) =>
          `<option value="${esc(persona.id)}">${esc(persona.id)}</option>`,
      ),
    )
    .join("");
  const modeOptions = MODES.map(
    (mode) => `<option value="${mode}">${mode}</option>`,
  ).join("");
  return `<form class="ha-setup" data-action="start">
  <select name="persona">${personaOptions}</select>
  <select name="mode">${modeOptions}</select>
  <input name="token" type="password" placeholder="bearer token (optional)" />
  <button type="submit">new session</button>
</form>`;
}

export function currentSessionView(state: AppState): SessionView | null {
  if (!state.descriptor) return null;
  return sessionView(state.descriptor, state.trace, state.personas);
}

export function renderSessionHeader(view: SessionView): string {
  return `<header class="ha-session-header">
  <span class="ha-session-id">${esc(view.sessionId)}</span>
  ${renderModeBadge(view.mode)}
  ${view.personaId ? `<span class="ha-badge">${esc(view.personaId)}</span>` : ""}
  <span class="ha-status ha-status-${esc(view.status)}">${esc(view.status)}</span>
</header>`;
}

export function renderApp(state: AppState): string {
  const view = currentSessionView(state);
  const turns = view
    ? view.turns
        .map((turn) =>
          renderTurn(turn, state.expandedTurns.includes(turn.turnId ?? -1)),
        )
        .join("")
    : "";
  return `<div class="ha-app">
  <div class="ha-topbar">${renderSetup(state)}${renderConnection(state)}</div>
  ${renderError(state.error)}
  <div class="ha-body">
    ${view ? renderPersonaPanel(view.persona) : ""}
    <main class="ha-chat">
      ${view ? renderSessionHeader(view) : `<p class="ha-muted">no session</p>`}
      <div class="ha-turns">${turns}</div>
      ${renderProgress(state)}
      ${renderComposer(state)}
    </main>
  </div>
</div>`;
}
