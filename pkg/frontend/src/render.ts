/** Pure HTML renderers. Read-only: rendering never mutates view data. */

import type { ChainNode, ChainView, VerdictPanel } from "./chain.js";
import type { QueueView } from "./queue.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderQueue(view: QueueView): string {
  if (view.rows.length === 0) {
    return '<div class="empty-state">Nothing waiting for review.</div>';
  }
  const rows = view.rows
    .map(
      (row) => `
  <tr class="queue-row queue-${row.status}" data-entry-id="${escapeHtml(row.id)}">
    <td class="cell-id">${escapeHtml(row.id)}</td>
    <td class="cell-kind">${escapeHtml(row.kind)}</td>
    <td class="cell-summary">${escapeHtml(row.summary)}</td>
    <td class="cell-age">${escapeHtml(row.age)}</td>
    <td class="cell-status">${escapeHtml(row.status)}</td>
    <td class="cell-actions">${renderActions(row.kind, row.status, row.id)}</td>
  </tr>`,
    )
    .join("");
  return `<table class="queue"><thead>
  <tr><th>id</th><th>kind</th><th>summary</th><th>age</th><th>status</th><th></th></tr>
</thead><tbody>${rows}
</tbody></table>`;
}

function renderActions(kind: string, status: string, id: string): string {
  if (status !== "open") return "";
  const eid = escapeHtml(id);
  if (kind === "candidate-axiom") {
    return (
      `<button data-action="approve" data-entry="${eid}">approve</button>` +
      `<button data-action="reject" data-entry="${eid}">reject</button>` +
      `<button data-action="edit" data-entry="${eid}">edit</button>`
    );
  }
  return (
    `<button data-action="certify" data-entry="${eid}">certify</button>` +
    `<button data-action="flag" data-entry="${eid}">flag</button>` +
    `<button data-action="view-chain" data-entry="${eid}">view chain</button>`
  );
}

export function renderCandidateDetail(payload: Record<string, unknown>): string {
  const rule = escapeHtml(String(payload["rule_text"] ?? ""));
  const excerpt = payload["excerpt"] ? escapeHtml(String(payload["excerpt"])) : null;
  return `<div class="candidate-detail">
  <pre class="rule-text">${rule}</pre>
  ${excerpt ? `<blockquote class="source-excerpt">${excerpt}</blockquote>` : ""}
  <textarea class="rule-editor" spellcheck="false">${rule}</textarea>
  <div class="parse-error-slot" hidden></div>
</div>`;
}

export function renderParseError(detail: string, column: number | null): string {
  const caret = column ? `<pre class="caret">${" ".repeat(column - 1)}^</pre>` : "";
  return `<div class="parse-error">${escapeHtml(detail)}${caret}</div>`;
}

export function renderBanner(kind: "error" | "info", message: string, retryable = false): string {
  const retry = retryable ? '<button data-action="retry">retry</button>' : "";
  return `<div class="banner banner-${kind}">${escapeHtml(message)}${retry}</div>`;
}

function issueBadges(count: number): string {
  return count === 0
    ? '<span class="badge badge-ok">ok</span>'
    : `<span class="badge badge-issues">${count} issue${count === 1 ? "" : "s"}</span>`;
}

function renderNode(node: ChainNode): string {
  const planIssues = node.planIssues
    .map((i) => `<li class="issue issue-${i.kind}">${escapeHtml(i.message)}</li>`)
    .join("");
  const plan =
    node.planSubtasks.length > 0
      ? `<div class="plan">${issueBadges(node.planIssues.length)} plan:
  <ol>${node.planSubtasks.map((s) => `<li>${escapeHtml(s)}</li>`).join("")}</ol>
  ${planIssues ? `<ul class="issues">${planIssues}</ul>` : ""}</div>`
      : "";
  const steps = node.steps
    .map((s) => {
      const issues = s.issues
        .map((i) => `<li class="issue issue-${i.kind}">${escapeHtml(i.message)}</li>`)
        .join("");
      const evidence = s.step.evidence
        .map(
          (e) =>
            `<li class="evidence">[${escapeHtml(e.kind)}] ${escapeHtml(e.target_id)}: ${escapeHtml(e.excerpt)}</li>`,
        )
        .join("");
      return `<li class="step ${s.issues.length ? "step-flagged" : "step-ok"}" data-step-index="${s.step.index}">
  ${issueBadges(s.issues.length)} <strong>step ${s.step.index}</strong> [${escapeHtml(s.step.tool)}]
  <div class="conclusion">${escapeHtml(s.step.conclusion_text)}</div>
  <details><summary>prompt + evidence</summary>
    <pre class="prompt">${escapeHtml(s.step.prompt)}</pre>
    <ul class="evidence-list">${evidence}</ul>
  </details>
  ${issues ? `<ul class="issues">${issues}</ul>` : ""}
</li>`;
    })
    .join("");
  const children = node.children.map((c) => `<li>${renderNode(c)}</li>`).join("");
  const aggIssues = node.aggregationIssues
    .map((i) => `<li class="issue issue-${i.kind}">${escapeHtml(i.message)}</li>`)
    .join("");
  const final =
    node.finalText !== null
      ? `<div class="final verdict-${node.verdict}">${issueBadges(node.aggregationIssues.length)}
  final: ${escapeHtml(node.finalText)}
  ${aggIssues ? `<ul class="issues">${aggIssues}</ul>` : ""}</div>`
      : "";
  return `<div class="chain-node" data-task-id="${escapeHtml(node.taskId)}">
  <div class="task-desc">${escapeHtml(node.description)}</div>
  ${plan}
  ${steps ? `<ul class="steps">${steps}</ul>` : ""}
  ${children ? `<ul class="children">${children}</ul>` : ""}
  ${final}
</div>`;
}

export function renderVerdictPanels(panels: VerdictPanel[]): string {
  const cells = panels
    .map(
      (p) => `<div class="verdict-panel verdict-${p.verdict}">
  <div class="verifier">${escapeHtml(p.verifierId)}</div>
  <div class="verdict">${escapeHtml(p.verdict)}</div>
  ${issueBadges(p.issueCount)}
  <ul class="messages">${p.messages.map((m) => `<li>${escapeHtml(m)}</li>`).join("")}</ul>
</div>`,
    )
    .join("");
  return `<div class="verdict-panels">${cells}</div>`;
}

export function renderChain(view: ChainView): string {
  const unresolved = view.unresolved
    .map((i) => `<li class="issue">${escapeHtml(i.message)}</li>`)
    .join("");
  return `<div class="chain chain-${view.outcome}">
  <div class="outcome">audit outcome: <strong>${escapeHtml(view.outcome)}</strong></div>
  ${renderVerdictPanels(view.panels)}
  ${renderNode(view.root)}
  ${unresolved ? `<div class="unresolved"><h4>unlocated issues</h4><ul>${unresolved}</ul></div>` : ""}
</div>`;
}
