/** Chain tree projection against recorded log/audit fixtures. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { buildChainView, panelSplit } from "../src/chain.js";
import type { ConsensusDoc, LogDoc } from "../src/types.js";

const FIXTURES = join(__dirname, "..", "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

const cleanLog = fixture<LogDoc>("task_log.json");
const cleanAudit = fixture<ConsensusDoc>("task_audit.json");
const flaggedLog = fixture<LogDoc>("flagged_log.json");
const flaggedAudit = fixture<ConsensusDoc>("flagged_audit.json");

describe("certified chain", () => {
  it("is an all-green tree", () => {
    const view = buildChainView(cleanLog, cleanAudit);
    expect(view.outcome).toBe("certified");
    expect(view.root.planIssues).toEqual([]);
    expect(view.root.aggregationIssues).toEqual([]);
    const flaggedSteps = view.root.children.flatMap((c) =>
      c.steps.filter((s) => s.issues.length > 0),
    );
    expect(flaggedSteps).toEqual([]);
    expect(view.unresolved).toEqual([]);
  });

  it("projects the full plan and all steps", () => {
    const view = buildChainView(cleanLog, cleanAudit);
    expect(view.root.planSubtasks.length).toBe(cleanLog.plan!.subtasks.length);
    const stepCount =
      view.root.steps.length + view.root.children.reduce((n, c) => n + c.steps.length, 0);
    const logSteps =
      cleanLog.steps.length + cleanLog.children.reduce((n, c) => n + c.steps.length, 0);
    expect(stepCount).toBe(logSteps);
  });
});

describe("flagged chain", () => {
  it("pins the issue on the faulty step", () => {
    const view = buildChainView(flaggedLog, flaggedAudit);
    expect(view.outcome).toBe("flagged");
    const flaggedSteps = [
      ...view.root.steps,
      ...view.root.children.flatMap((c) => c.steps),
    ].filter((s) => s.issues.length > 0);
    expect(flaggedSteps.length).toBeGreaterThan(0);
    // The mismatch fixture's faulty claim sits at step 2.
    expect(flaggedSteps.some((s) => s.step.index === 2)).toBe(true);
    expect(view.unresolved).toEqual([]);
  });

  it("every issue location resolves to a rendered node", () => {
    const view = buildChainView(flaggedLog, flaggedAudit);
    const rendered = new Set<number>();
    const collect = (node: typeof view.root): void => {
      for (const s of node.steps) rendered.add(s.step.index);
      node.children.forEach(collect);
    };
    collect(view.root);
    for (const report of flaggedAudit.reports) {
      for (const issue of report.issues) {
        if (issue.location === "step") {
          expect(rendered.has(issue.step_index!)).toBe(true);
        }
      }
    }
  });
});

describe("disagreement panels", () => {
  it("shows side-by-side verdicts with a 2-vs-1 split", () => {
    const disagreement: ConsensusDoc = {
      outcome: "disagreement",
      promoted_theorem_id: null,
      reports: [
        { ...cleanAudit.reports[0], verifier_id: "llm:v1:a" },
        {
          ...cleanAudit.reports[0],
          verifier_id: "llm:v2:a",
          verdict: "error-flagged",
          issues: [
            {
              location: "step",
              kind: "missing-evidence",
              message: "conclusion in step 2 lacks evidence support",
              step_index: 2,
              cited_rule: null,
            },
          ],
        },
        { ...cleanAudit.reports[0], verifier_id: "llm:v3:b" },
      ],
    };
    const view = buildChainView(cleanLog, disagreement);
    expect(view.panels.length).toBe(3);
    expect(panelSplit(view.panels)).toEqual({ passed: 2, flagged: 1 });
    expect(view.panels.map((p) => p.verifierId)).toEqual(["llm:v1:a", "llm:v2:a", "llm:v3:b"]);
  });
});
