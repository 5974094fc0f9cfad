/**
 * DOM wiring for the review panel: one in-flight mutation at a time, a
 * refresh after every server response, and manual refresh for long waits.
 */

import { ApiError, SessionApi } from "./api.js";
import { DecisionBoard, type Verdict } from "./state.js";
import {
  renderCandidates,
  renderError,
  renderQuery,
  renderRanking,
  renderStatus,
} from "./render.js";

const api = new SessionApi("");

let board = new DecisionBoard([]);
let boardIteration = -1;
let busy = false;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node;
}

async function refresh(): Promise<void> {
  try {
    const info = await api.session();
    const ranking = await api.ranking();
    const candidates = await api.candidates();
    if (candidates.iteration !== boardIteration) {
      board = new DecisionBoard(candidates.candidates.map((c) => c.term));
      boardIteration = candidates.iteration;
    }
    el("status").innerHTML = renderStatus(info);
    el("query").innerHTML = renderQuery(info.query, info.seed_query);
    el("ranking").innerHTML = renderRanking(
      ranking.ranking,
      info.relevant,
      info.previous_relevant,
    );
    const pane = el("candidates");
    if (info.status === "awaiting_decisions") {
      pane.innerHTML = renderCandidates(candidates.candidates, board);
    } else if (info.status === "awaiting_iteration") {
      pane.innerHTML = `<button id="run-iteration">run next iteration</button>`;
    } else {
      pane.innerHTML = "";
    }
    el("error").innerHTML = "";
  } catch (err) {
    el("error").innerHTML = renderError(
      err instanceof Error ? err.message : String(err),
    );
  }
}

async function mutate(action: () => Promise<unknown>): Promise<void> {
  if (busy) {
    return;
  }
  busy = true;
  try {
    await action();
  } catch (err) {
    if (err instanceof ApiError) {
      el("error").innerHTML = renderError(err.message);
    } else {
      throw err;
    }
  } finally {
    busy = false;
  }
  await refresh();
}

document.addEventListener("click", (event) => {
  const target = event.target;
  if (!(target instanceof HTMLElement)) {
    return;
  }
  if (target.dataset.term !== undefined && target.dataset.verdict !== undefined) {
    board.decide(target.dataset.term, target.dataset.verdict as Verdict);
    void refresh();
  } else if (target.id === "submit-decisions") {
    // the board refuses an incomplete map before any network call
    void mutate(() => api.submitDecisions(board.toMap()));
  } else if (target.id === "run-iteration") {
    void mutate(() => api.iterate());
  } else if (target.id === "retry" || target.id === "refresh") {
    void refresh();
  }
});

void refresh();
setInterval(() => {
  if (!busy) {
    void refresh();
  }
}, 4000);
