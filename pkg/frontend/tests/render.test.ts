/** Renderers: read-only HTML generation. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { buildChainView } from "../src/chain.js";
import { buildQueueView } from "../src/queue.js";
import {
  escapeHtml,
  renderBanner,
  renderCandidateDetail,
  renderChain,
  renderParseError,
  renderQueue,
} from "../src/render.js";
import type { ConsensusDoc, LogDoc, QueueResponse } from "../src/types.js";

const FIXTURES = join(__dirname, "..", "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

describe("escaping", () => {
  it("neutralizes markup in untrusted text", () => {
    expect(escapeHtml('<script>alert("x")</script>')).not.toContain("<script>");
  });
});

describe("queue rendering", () => {
  it("empty queue renders the empty state", () => {
    expect(renderQueue(buildQueueView([], {}, 0))).toContain("empty-state");
  });

  it("candidate rows carry rule text and action buttons", () => {
    const queue = fixture<QueueResponse>("queue.json");
    const html = renderQueue(buildQueueView(queue.entries, { status: "open" }, 1000));
    expect(html).toContain("amoxicillin");
    expect(html).toContain('data-action="approve"');
    expect(html).toContain('data-action="edit"');
  });

  it("candidate detail shows the source excerpt", () => {
    const queue = fixture<QueueResponse>("queue.json");
    const candidate = queue.entries.find((e) => e.kind === "candidate-axiom")!;
    const html = renderCandidateDetail(candidate.payload);
    expect(html).toContain("source-excerpt");
    expect(html).toContain("penicillin class");
  });
});

describe("banners and errors", () => {
  it("service-down banner is retryable", () => {
    const html = renderBanner("error", "service unreachable", true);
    expect(html).toContain("banner-error");
    expect(html).toContain('data-action="retry"');
  });

  it("parse errors point at the offending column", () => {
    const html = renderParseError("boom at line 1, column 4", 4);
    expect(html).toContain("   ^");
  });
});

describe("chain rendering", () => {
  it("renders flagged steps with issue badges and a verdict panel per report", () => {
    const log = fixture<LogDoc>("flagged_log.json");
    const audit = fixture<ConsensusDoc>("flagged_audit.json");
    const html = renderChain(buildChainView(log, audit));
    expect(html).toContain("step-flagged");
    expect(html).toContain("verdict-panel");
    expect((html.match(/class="verdict-panel /g) ?? []).length).toBe(audit.reports.length);
    expect(html).toContain("badge-issues");
  });

  it("rendering does not mutate the view", () => {
    const log = fixture<LogDoc>("task_log.json");
    const audit = fixture<ConsensusDoc>("task_audit.json");
    const view = buildChainView(log, audit);
    const snapshot = JSON.stringify(view);
    renderChain(view);
    expect(JSON.stringify(view)).toBe(snapshot);
  });
});
