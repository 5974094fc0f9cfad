/**
 * Pure HTML renderers for the review panel.
 *
 * Every function maps server payloads (plus the local decision board) to a
 * markup string; no scores or rankings are computed client-side. Keeping
 * these DOM-free makes them directly unit-testable.
 */

import type { Candidate, RankingRow, SessionInfo } from "./api.js";
import { DecisionBoard, newSinceLastIteration } from "./state.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Server numbers are shown verbatim, not reformatted. */
function num(value: number): string {
  return String(value);
}

export function renderStatus(info: SessionInfo): string {
  const parts: string[] = [];
  parts.push(
    `<div class="statusline">session <code>${escapeHtml(info.session_id)}</code>` +
      ` &middot; iteration ${info.iteration}` +
      ` &middot; status <strong>${escapeHtml(info.status)}</strong></div>`,
  );
  if (info.status === "converged") {
    parts.push(
      `<div class="banner converged">Converged: the query and relevant set` +
        ` are stable after ${info.iteration} iterations.</div>`,
    );
  }
  if (info.zero_signal) {
    parts.push(
      `<div class="banner warn">No query term appears in any document;` +
        ` this ranking carries no signal.</div>`,
    );
  }
  return parts.join("\n");
}

export function renderQuery(
  query: readonly string[],
  seedQuery: readonly string[],
): string {
  const seeds = new Set(seedQuery);
  const chips = query
    .map((term) => {
      const kind = seeds.has(term) ? "seed" : "accepted";
      return `<span class="chip ${kind}">${escapeHtml(term)}</span>`;
    })
    .join(" ");
  return `<div class="query">${chips}</div>`;
}

export function renderRanking(
  rows: readonly RankingRow[],
  relevant: readonly string[],
  previousRelevant: readonly string[] | null,
): string {
  if (rows.length === 0) {
    return `<p class="empty">No ranking yet — run the first iteration.</p>`;
  }
  const inRelevant = new Set(relevant);
  const fresh = newSinceLastIteration(relevant, previousRelevant);
  const body = rows
    .map((row) => {
      const classes = inRelevant.has(row.document) ? ` class="in-k"` : "";
      const badge = fresh.has(row.document)
        ? ` <span class="badge new">new</span>`
        : "";
      return (
        `<tr${classes}><td>${escapeHtml(row.document)}${badge}</td>` +
        `<td class="num">${num(row.score)}</td>` +
        `<td class="num">${num(row.total_words)}</td></tr>`
      );
    })
    .join("\n");
  return (
    `<table class="ranking"><thead><tr>` +
    `<th>document</th><th>score</th><th>words</th>` +
    `</tr></thead><tbody>\n${body}\n</tbody></table>`
  );
}

export function renderCandidates(
  candidates: readonly Candidate[],
  board: DecisionBoard,
): string {
  if (candidates.length === 0) {
    return `<p class="empty">No candidates this round.</p>`;
  }
  const rows = candidates
    .map((candidate) => {
      const verdict = board.verdictOf(candidate.term);
      const accept = verdict === "accepted" ? " chosen" : "";
      const reject = verdict === "rejected" ? " chosen" : "";
      return (
        `<tr><td>${escapeHtml(candidate.term)}</td>` +
        `<td class="num">${num(candidate.score)}</td>` +
        `<td><button class="accept${accept}" data-term="${escapeHtml(candidate.term)}"` +
        ` data-verdict="accepted">accept</button>` +
        `<button class="reject${reject}" data-term="${escapeHtml(candidate.term)}"` +
        ` data-verdict="rejected">reject</button></td></tr>`
      );
    })
    .join("\n");
  const blocked = board.complete
    ? ""
    : ` disabled title="undecided: ${escapeHtml(board.undecided.join(", "))}"`;
  return (
    `<table class="candidates"><thead><tr>` +
    `<th>term</th><th>score</th><th>decision</th>` +
    `</tr></thead><tbody>\n${rows}\n</tbody></table>` +
    `<button id="submit-decisions"${blocked}>submit decisions</button>`
  );
}

export function renderError(message: string): string {
  return (
    `<div class="banner error">${escapeHtml(message)}` +
    ` <button id="retry">retry</button></div>`
  );
}
