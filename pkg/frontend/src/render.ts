import type { SessionView } from "./state.js";
import type { SafetyVerdictPayload, StepPayload, Turn } from "./types.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Left-to-right DAG: one node per chain step, arrows follow step order. */
export function renderDag(plan: string[], statuses: string[]): string {
  if (plan.length === 0) return '<div class="dag empty">no plan yet</div>';
  const nodes = plan.map((tool, i) => {
    const status = statuses[i] ?? "pending";
    const arrow = i < plan.length - 1 ? '<span class="edge">&#8594;</span>' : "";
    return (
      `<span class="node status-${esc(status)}" data-step="${i}">` +
      `<span class="tool">${esc(tool)}</span>` +
      `<span class="chip">${esc(status)}</span></span>${arrow}`
    );
  });
  return `<div class="dag">${nodes.join("")}</div>`;
}

export function renderSafetyPanel(notes: string[], verdicts: SafetyVerdictPayload[] = []): string {
  if (notes.length === 0 && verdicts.every((v) => !v.flagged)) return "";
  const items = notes.map((n) => `<li>${esc(n)}</li>`).join("");
  const rows = verdicts
    .filter((v) => v.flagged)
    .map(
      (v) =>
        `<li class="verdict">${esc(v.kind)} similarity ${v.score.toFixed(4)} ` +
        `to ${esc(v.matched ?? "?")} (threshold ${v.threshold})</li>`,
    )
    .join("");
  return (
    '<section class="safety-panel"><h3>Safety warning</h3>' +
    `<ul>${items}${rows}</ul></section>`
  );
}

export function renderTurns(turns: Turn[]): string {
  if (turns.length === 0) return '<div class="turns empty">no turns yet</div>';
  const blocks = turns.map((turn, i) => {
    const flag = turn.answer.best_effort ? ' <span class="best-effort">best effort</span>' : "";
    return (
      `<article class="turn" data-turn="${i}"><h4>Turn ${i + 1}</h4>` +
      `<p class="q">${esc(turn.query)}</p>` +
      `<p class="a">${esc(turn.answer.text)}</p>${flag}</article>`
    );
  });
  return `<div class="turns">${blocks.join("")}</div>`;
}

export function renderKg(view: { tool: string; d: number; neighbors: string[] | null } | null): string {
  if (!view) return "";
  if (view.neighbors === null) {
    return `<div class="kg not-found">tool "${esc(view.tool)}" not found</div>`;
  }
  if (view.neighbors.length === 0) {
    return (
      `<div class="kg"><span class="node center">${esc(view.tool)}</span>` +
      '<span class="lone">no neighbors at this depth</span></div>'
    );
  }
  const nodes = view.neighbors
    .map((n) => `<span class="node neighbor">${esc(n)}</span>`)
    .join("");
  return (
    `<div class="kg"><span class="node center">${esc(view.tool)}</span>` +
    `<span class="edge">&#8594;</span>${nodes}</div>`
  );
}

export function renderBanner(message: string): string {
  return message ? `<div class="banner error">${esc(message)}</div>` : "";
}

export function renderStepDetails(steps: StepPayload[]): string {
  const rows = steps
    .map((s) => {
      const outs = Object.entries(s.outputs)
        .map(([fmt, value]) => `${esc(fmt)}=${esc(value)}`)
        .join("; ");
      return (
        `<tr class="status-${esc(s.status)}"><td>${s.index}</td><td>${esc(s.tool)}</td>` +
        `<td>${esc(s.status)}</td><td>${s.attempts}</td><td>${outs}</td></tr>`
      );
    })
    .join("");
  return (
    '<table class="steps"><thead><tr><th>#</th><th>tool</th><th>status</th>' +
    `<th>attempts</th><th>outputs</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderApp(view: SessionView): string {
  return [
    renderBanner(view.banner),
    `<header class="session">session <code>${esc(view.sessionId || "none")}</code>` +
      (view.busy ? ' <span class="busy">running</span>' : "") +
      "</header>",
    renderDag(view.plan, view.chipStatuses()),
    renderSafetyPanel(view.safetyNotes),
    renderTurns(view.turns),
    renderKg(view.kg),
  ].join("\n");
}
