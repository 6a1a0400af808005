/** Browser bootstrap: polling queue, decision wiring, chain viewer.
 *
 * All state changes go through the service; the only local state is the
 * session's queue snapshot and the currently open chain.
 */

import { ApiClient, ApiError } from "./api.js";
import { buildChainView } from "./chain.js";
import { QueueStore, buildQueueView, submitWithOptimism } from "./queue.js";
import {
  renderBanner,
  renderCandidateDetail,
  renderChain,
  renderParseError,
  renderQueue,
} from "./render.js";

declare global {
  interface Window {
    MMIA_API_BASE?: string;
    MMIA_POLL_SECONDS?: number;
  }
}

const api = new ApiClient(window.MMIA_API_BASE ?? "http://127.0.0.1:8321");
const store = new QueueStore();
let filters: { kind?: string; status?: string } = { status: "open" };

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function redraw(): void {
  el("queue").innerHTML = renderQueue(buildQueueView(store.all(), filters));
}

async function refresh(): Promise<void> {
  try {
    store.load(await api.fetchQueue());
    el("banner").innerHTML = "";
    redraw();
  } catch (err) {
    const detail = err instanceof ApiError ? err.message : String(err);
    el("banner").innerHTML = renderBanner("error", `service unreachable: ${detail}`, true);
  }
}

async function decide(entryId: string, decision: "approve" | "reject"): Promise<void> {
  const outcome = await submitWithOptimism(store, api, entryId, { decision }, crypto.randomUUID());
  if (!outcome.ok) {
    el("banner").innerHTML = renderBanner("error", `${outcome.code}: ${outcome.detail}`);
  }
  redraw();
}

async function editRule(entryId: string): Promise<void> {
  const entry = store.get(entryId);
  if (!entry) return;
  el("detail").innerHTML = renderCandidateDetail(entry.payload);
  const editor = el("detail").querySelector(".rule-editor") as HTMLTextAreaElement;
  const slot = el("detail").querySelector(".parse-error-slot") as HTMLElement;
  const submit = document.createElement("button");
  submit.textContent = "submit edit";
  submit.addEventListener("click", async () => {
    const outcome = await submitWithOptimism(
      store,
      api,
      entryId,
      { decision: "edit", rule_text: editor.value },
      crypto.randomUUID(),
    );
    if (!outcome.ok) {
      slot.hidden = false;
      slot.innerHTML = renderParseError(outcome.detail, outcome.parseError?.column ?? null);
      return;
    }
    el("detail").innerHTML = "";
    redraw();
  });
  el("detail").appendChild(submit);
}

async function viewChain(entryId: string): Promise<void> {
  const entry = store.get(entryId);
  const taskId = entry ? String(entry.payload["task_id"] ?? "") : "";
  if (!taskId) return;
  try {
    const [log, audit] = await Promise.all([api.fetchLog(taskId), api.fetchAudit(taskId)]);
    el("detail").innerHTML = renderChain(buildChainView(log, audit));
  } catch (err) {
    const detail = err instanceof ApiError ? err.message : String(err);
    el("detail").innerHTML = renderBanner("error", `cannot load chain: ${detail}`);
  }
}

function wire(): void {
  el("queue").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset["action"];
    const entryId = target.dataset["entry"];
    if (!action || !entryId) return;
    if (action === "approve" || action === "reject") void decide(entryId, action);
    else if (action === "edit") void editRule(entryId);
    else if (action === "certify" || action === "flag") {
      void submitWithOptimism(store, api, entryId, { decision: action }).then(redraw);
    } else if (action === "view-chain") void viewChain(entryId);
  });
  el("banner").addEventListener("click", (event) => {
    if ((event.target as HTMLElement).dataset["action"] === "retry") void refresh();
  });
  for (const kind of ["", "candidate-axiom", "audit-disagreement"]) {
    const button = document.querySelector(`[data-filter-kind="${kind}"]`);
    button?.addEventListener("click", () => {
      filters = { ...filters, kind: kind || undefined };
      redraw();
    });
  }
}

wire();
void refresh();
window.setInterval(() => void refresh(), (window.MMIA_POLL_SECONDS ?? 5) * 1000);
