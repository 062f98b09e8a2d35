// HTML string renderers. Presentation only: every count is printed verbatim
// from service data, so what the page shows is exactly what the service said.

import { PendingTie, RoundRow, SessionState } from "./api.js";
import { Branch, Preview } from "./session.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** One bar per party; widths are relative to the largest count. */
export function seatBars(parties: string[], counts: number[]): string {
  const max = Math.max(1, ...counts);
  const rows = parties.map((name, i) => {
    const n = counts[i] ?? 0;
    const pct = Math.round((n * 100) / max);
    return (
      `<div class="bar-row"><span class="bar-name">${escapeHtml(name)}</span>` +
      `<span class="bar" style="width:${pct}%"></span>` +
      `<span class="bar-count">${n}</span></div>`
    );
  });
  return `<div class="bars">${rows.join("")}</div>`;
}

/** Round-by-round table: remaining tallies, selected party starred. */
export function roundTable(parties: string[], rounds: RoundRow[], assigned?: number[]): string {
  const head =
    "<tr><th>round</th>" +
    parties.map((p) => `<th>${escapeHtml(p)}</th>`).join("") +
    "<th>selected</th></tr>";
  const body = rounds.map((r, i) => {
    const cells = parties
      .map((p, j) => `<td>${r.tally[j]}${r.selected.includes(p) ? "*" : ""}</td>`)
      .join("");
    let sel = r.selected.map((p, k) => `${escapeHtml(p)} +${r.absorbed[k]}`).join(", ");
    if (r.selected.length > 1) sel += " (split)";
    if (r.note) sel += ` <em>[${escapeHtml(r.note)}]</em>`;
    return `<tr><td>${i + 1}</td>${cells}<td>${sel}</td></tr>`;
  });
  if (assigned) {
    const cells = assigned.map((n) => `<td>${n}</td>`).join("");
    body.push(`<tr class="final"><td>final</td>${cells}<td></td></tr>`);
  }
  return `<table class="rounds">${head}${body.join("")}</table>`;
}

export function tiePanel(tie: PendingTie): string {
  const picks = tie.tied
    .map(
      (p) =>
        `<button data-tie-party="${escapeHtml(p)}">pick ${escapeHtml(p)}</button>`,
    )
    .join(" ");
  const strategies = tie.strategies
    .filter((s) => s !== "pick")
    .map((s) => `<button data-tie-strategy="${escapeHtml(s)}">${escapeHtml(s)}</button>`)
    .join(" ");
  return (
    `<div class="tie"><p>tie between ${tie.tied.map(escapeHtml).join(", ")}</p>` +
    `<p>${picks} ${strategies} <button data-branches="1">all branches</button></p></div>`
  );
}

export function sessionPanel(parties: string[], state: SessionState): string {
  const status = state.finished
    ? "finished"
    : state.pending_tie
      ? "tie pending"
      : `round ${state.rounds.length + 1}`;
  const parts = [
    `<p class="status">session ${escapeHtml(state.session)} on ${escapeHtml(state.election)}: ${status}</p>`,
    `<p>order so far: ${state.order.length ? state.order.map(escapeHtml).join(", ") : "(none)"}</p>`,
    "<h3>assigned so far</h3>",
    seatBars(parties, state.assigned),
    "<h3>remaining tallies</h3>",
    seatBars(parties, state.tally),
    roundTable(parties, state.rounds, state.finished ? state.assigned : undefined),
  ];
  if (state.pending_tie) parts.push(tiePanel(state.pending_tie));
  return parts.join("\n");
}

export function previewCard(p: Preview, index: number): string {
  return (
    `<div class="card${p.pinned ? " pinned" : ""}" data-preview="${index}">` +
    `<h3>${escapeHtml(p.label)}</h3>` +
    `<p>ordering: ${p.order.map(escapeHtml).join(", ")}</p>` +
    seatBars(p.trace.parties, p.trace.assigned) +
    roundTable(p.trace.parties, [...p.trace.rounds], p.trace.assigned) +
    `<details><summary>trace</summary><pre class="trace">${escapeHtml(p.traceText)}</pre></details>` +
    `<button data-pin="${index}">${p.pinned ? "unpin" : "pin"}</button>` +
    "</div>"
  );
}

export function branchTable(parties: string[], branches: Branch[]): string {
  const head =
    "<tr><th>action</th>" +
    parties.map((p) => `<th>${escapeHtml(p)}</th>`).join("") +
    "<th>ordering</th></tr>";
  const rows = branches.map((b) => {
    if (!b.state) {
      const span = parties.length + 1;
      return `<tr><td>${escapeHtml(b.action)}</td><td colspan="${span}" class="error">${escapeHtml(b.error ?? "failed")}</td></tr>`;
    }
    const cells = b.state.assigned.map((n) => `<td>${n}</td>`).join("");
    const order = b.order ? b.order.map(escapeHtml).join(", ") : "(split: no single ordering)";
    return `<tr><td>${escapeHtml(b.action)}</td>${cells}<td>${order}</td></tr>`;
  });
  return `<table class="branches">${head}${rows.join("")}</table>`;
}

export function errorBox(message: string): string {
  return `<div class="error">${escapeHtml(message)}</div>`;
}
