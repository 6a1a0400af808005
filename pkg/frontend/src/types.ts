/** Wire types mirroring the service's published JSON schemas. */

export type QueueEntryKind = "candidate-axiom" | "audit-disagreement";
export type QueueEntryStatus = "open" | "resolved";

export interface QueueEntry {
  id: string;
  kind: QueueEntryKind;
  payload: Record<string, unknown>;
  status: QueueEntryStatus;
  resolution: Record<string, unknown> | null;
  enqueued_at: number;
}

export interface QueueResponse {
  entries: QueueEntry[];
}

export interface AuditIssue {
  location: "plan" | "step" | "aggregation";
  kind: string;
  message: string;
  step_index: number | null;
  cited_rule: string | null;
}

export interface AuditReport {
  schema: "audit_v1";
  log_id: string;
  verdict: "certification-passed" | "error-flagged";
  issues: AuditIssue[];
  verifier_id: string;
  token_usage: { prompt_tokens: number; completion_tokens: number };
}

export interface ConsensusDoc {
  reports: AuditReport[];
  outcome: "certified" | "flagged" | "disagreement";
  promoted_theorem_id: string | null;
}

export type AtomTriple = [string, string, unknown];

export interface EvidenceRef {
  kind: "axiom" | "theorem" | "prior-step" | "external-document" | "web-result";
  target_id: string;
  excerpt: string;
}

export interface StepDoc {
  index: number;
  subtask_id: string;
  tool: string;
  prompt: string;
  evidence: EvidenceRef[];
  conclusion_text: string;
  atoms: AtomTriple[];
  raw_output: string;
  token_usage: { prompt_tokens: number; completion_tokens: number };
}

export interface TaskDoc {
  id: string;
  description: string;
  scenario: string;
  goal_attrs: string[];
}

export interface PlanDoc {
  task_id: string;
  subtasks: TaskDoc[];
  dependencies: [number, number][];
  rationale: string;
}

export interface FinalAnswerDoc {
  text: string;
  atoms: AtomTriple[];
  verdict: "correct" | "erroneous" | "none";
}

export interface LogDoc {
  schema: "log_v1";
  task: TaskDoc;
  plan: PlanDoc | null;
  steps: StepDoc[];
  children: LogDoc[];
  final_answer: FinalAnswerDoc | null;
  mode: "de-novo" | "rag-match";
  status: "completed" | "failed";
  error: string | null;
  total_tokens: number;
}

export interface ProblemDetail {
  type: string;
  title: string;
  status: number;
  code: string;
  detail: string;
}

export type ReviewDecision =
  | { decision: "approve" | "reject"; reviewer?: string }
  | { decision: "edit"; rule_text: string; reviewer?: string }
  | { decision: "certify" | "flag" | "dismiss"; note?: string; reviewer?: string };
