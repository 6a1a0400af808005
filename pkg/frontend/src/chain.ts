/** Chain tree projection with audit issues overlaid by location.
 *
 * The invariant this module guards: every issue in the audit reports must
 * resolve to a rendered node (a plan, a step, or an aggregation slot);
 * anything left over is surfaced in `unresolved` rather than dropped.
 */

import type { AuditIssue, AuditReport, ConsensusDoc, LogDoc, StepDoc } from "./types.js";

export interface StepNode {
  step: StepDoc;
  issues: AuditIssue[];
}

export interface ChainNode {
  taskId: string;
  description: string;
  planSubtasks: string[];
  planIssues: AuditIssue[];
  steps: StepNode[];
  children: ChainNode[];
  finalText: string | null;
  verdict: string;
  aggregationIssues: AuditIssue[];
}

export interface VerdictPanel {
  verifierId: string;
  verdict: string;
  issueCount: number;
  messages: string[];
}

export interface ChainView {
  root: ChainNode;
  outcome: string;
  panels: VerdictPanel[];
  unresolved: AuditIssue[];
}

function collectIssues(reports: AuditReport[]): AuditIssue[] {
  const seen = new Set<string>();
  const out: AuditIssue[] = [];
  for (const report of reports) {
    for (const issue of report.issues) {
      const key = `${issue.location}|${issue.step_index}|${issue.kind}|${issue.message}`;
      if (!seen.has(key)) {
        seen.add(key);
        out.push(issue);
      }
    }
  }
  return out;
}

function buildNode(log: LogDoc, stepIssues: Map<number, AuditIssue[]>): ChainNode {
  return {
    taskId: log.task.id,
    description: log.task.description,
    planSubtasks: log.plan ? log.plan.subtasks.map((s) => s.description) : [],
    planIssues: [],
    steps: log.steps.map((s) => ({ step: s, issues: stepIssues.get(s.index) ?? [] })),
    children: log.children.map((c) => buildNode(c, stepIssues)),
    finalText: log.final_answer?.text ?? null,
    verdict: log.final_answer?.verdict ?? "none",
    aggregationIssues: [],
  };
}

function hasStep(node: ChainNode, index: number): boolean {
  return (
    node.steps.some((s) => s.step.index === index) ||
    node.children.some((c) => hasStep(c, index))
  );
}

export function buildChainView(log: LogDoc, consensus: ConsensusDoc): ChainView {
  const issues = collectIssues(consensus.reports);
  const stepIssues = new Map<number, AuditIssue[]>();
  for (const issue of issues) {
    if (issue.location === "step" && issue.step_index !== null) {
      const bucket = stepIssues.get(issue.step_index) ?? [];
      bucket.push(issue);
      stepIssues.set(issue.step_index, bucket);
    }
  }
  const root = buildNode(log, stepIssues);
  const unresolved: AuditIssue[] = [];
  for (const issue of issues) {
    if (issue.location === "plan") {
      // Pin to the node whose plan the message names, else the root plan.
      const target = findPlanNode(root, issue.message) ?? root;
      target.planIssues.push(issue);
    } else if (issue.location === "aggregation") {
      root.aggregationIssues.push(issue);
    } else if (issue.step_index === null || !hasStep(root, issue.step_index)) {
      unresolved.push(issue);
    }
  }
  const panels = consensus.reports.map((r) => ({
    verifierId: r.verifier_id,
    verdict: r.verdict,
    issueCount: r.issues.length,
    messages: r.issues.map((i) => i.message),
  }));
  return { root, outcome: consensus.outcome, panels, unresolved };
}

function findPlanNode(node: ChainNode, message: string): ChainNode | null {
  if (node.planSubtasks.length > 0 && message.includes(node.taskId)) return node;
  for (const child of node.children) {
    const found = findPlanNode(child, message);
    if (found) return found;
  }
  return null;
}

/** 2-vs-1 style summary for disagreement entries. */
export function panelSplit(panels: VerdictPanel[]): { passed: number; flagged: number } {
  let passed = 0;
  let flagged = 0;
  for (const p of panels) {
    if (p.verdict === "certification-passed") passed += 1;
    else flagged += 1;
  }
  return { passed, flagged };
}
