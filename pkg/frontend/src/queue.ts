/** Queue projection and the optimistic-update state machine.
 *
 * Rows mirror GET /review/queue entries one to one at fetch time. A
 * submitted decision marks the row resolved immediately and rolls back if
 * the service answers with a conflict or validation problem.
 */

import { ApiClient, ApiError } from "./api.js";
import type { QueueEntry, ReviewDecision } from "./types.js";

export interface QueueRow {
  id: string;
  kind: string;
  summary: string;
  age: string;
  status: string;
  entry: QueueEntry;
}

export interface QueueView {
  rows: QueueRow[];
  filters: { kind?: string; status?: string };
}

export function summarize(entry: QueueEntry): string {
  if (entry.kind === "candidate-axiom") {
    const rule = String(entry.payload["rule_text"] ?? "");
    const axiomId = String(entry.payload["axiom_id"] ?? "?");
    return `${axiomId}: ${rule}`;
  }
  const taskId = String(entry.payload["task_id"] ?? "?");
  const reports = (entry.payload["reports"] as unknown[] | undefined) ?? [];
  return `audit disagreement on ${taskId} (${reports.length} verdicts)`;
}

export function formatAge(enqueuedAt: number, now: number): string {
  const seconds = Math.max(0, Math.floor(now - enqueuedAt));
  if (seconds < 60) return `${seconds}s`;
  if (seconds < 3600) return `${Math.floor(seconds / 60)}m`;
  return `${Math.floor(seconds / 3600)}h`;
}

export function buildQueueView(
  entries: QueueEntry[],
  filters: { kind?: string; status?: string } = {},
  now: number = Date.now() / 1000,
): QueueView {
  const rows = entries
    .filter((e) => !filters.kind || e.kind === filters.kind)
    .filter((e) => !filters.status || e.status === filters.status)
    .map((e) => ({
      id: e.id,
      kind: e.kind,
      summary: summarize(e),
      age: formatAge(e.enqueued_at, now),
      status: e.status,
      entry: e,
    }));
  return { rows, filters };
}

export interface ParseErrorLocation {
  line: number;
  column: number;
}

/** Pull the offending line/column out of a parse-error problem detail. */
export function parseErrorLocation(detail: string): ParseErrorLocation | null {
  const m = /line (\d+), column (\d+)/.exec(detail);
  if (!m) return null;
  return { line: Number(m[1]), column: Number(m[2]) };
}

export type SubmitOutcome =
  | { ok: true; entry: QueueEntry }
  | { ok: false; code: string; detail: string; parseError: ParseErrorLocation | null };

export class QueueStore {
  private entries = new Map<string, QueueEntry>();

  load(entries: QueueEntry[]): void {
    this.entries = new Map(entries.map((e) => [e.id, e]));
  }

  all(): QueueEntry[] {
    return [...this.entries.values()].sort((a, b) => a.id.localeCompare(b.id));
  }

  get(id: string): QueueEntry | undefined {
    return this.entries.get(id);
  }

  /** Optimistically resolve; returns a rollback function. */
  markResolved(id: string, resolution: Record<string, unknown>): () => void {
    const current = this.entries.get(id);
    if (!current) return () => undefined;
    const snapshot = { ...current };
    this.entries.set(id, { ...current, status: "resolved", resolution });
    return () => {
      this.entries.set(id, snapshot);
    };
  }

  apply(entry: QueueEntry): void {
    this.entries.set(entry.id, entry);
  }
}

export async function submitWithOptimism(
  store: QueueStore,
  api: ApiClient,
  entryId: string,
  decision: ReviewDecision,
  idempotencyKey?: string,
): Promise<SubmitOutcome> {
  const rollback = store.markResolved(entryId, { decision: decision.decision, pending: true });
  try {
    const entry = await api.submitDecision(entryId, decision, idempotencyKey);
    store.apply(entry);
    return { ok: true, entry };
  } catch (err) {
    rollback();
    if (err instanceof ApiError) {
      const detail = err.problem?.detail ?? "";
      return {
        ok: false,
        code: err.code,
        detail,
        parseError: err.code === "parse-error" ? parseErrorLocation(detail) : null,
      };
    }
    throw err;
  }
}
