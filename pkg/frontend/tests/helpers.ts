/** Shared fixtures for the UI tests: page loading, fake payloads, stub client. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { vi } from "vitest";

import type {
  AssetRecord,
  ExecutePayload,
  SampleSummary,
  SessionPayload,
} from "../src/api.js";
import type { ServiceClient } from "../src/ui.js";

/** Inject the real index.html body so tests exercise the shipped markup.
 * Vitest runs with the package root as cwd; import.meta.url is not a file
 * URL under jsdom, so resolve from the working directory instead.
 */
export function loadPage(doc: Document): void {
  const html = readFileSync(join(process.cwd(), "index.html"), "utf8");
  const body = /<body>([\s\S]*)<\/body>/.exec(html);
  if (body === null || body[1] === undefined) {
    throw new Error("index.html has no <body> section");
  }
  doc.body.innerHTML = body[1];
}

export function cardIds(doc: Document): string[] {
  return Array.from(doc.querySelectorAll<HTMLElement>("#timeline .card")).map(
    (card) => card.dataset["clipId"] ?? "",
  );
}

export function asset(id: string, caption: string, uri: string | null = null): AssetRecord {
  return { clip_id: id, caption, uri };
}

export const FOUR_ASSETS: AssetRecord[] = [
  asset("0001", "a dog running on the beach"),
  asset("0002", "a cat asleep on a chair"),
  asset("0003", "waves breaking against rocks"),
  asset("0004", "fireworks over the harbor"),
];

export function sessionPayload(overrides: Partial<SessionPayload> = {}): SessionPayload {
  return {
    session_id: "abc123def456",
    collection: FOUR_ASSETS,
    timeline: ["0001", "0002", "0003"],
    history_length: 0,
    source: { dataset_id: "ds-0001", sample_id: "swap-positional-0000" },
    ...overrides,
  };
}

export function executePayload(overrides: Partial<ExecutePayload> = {}): ExecutePayload {
  return {
    timeline: ["0002", "0001", "0003"],
    ops: [
      {
        op: "swap",
        a: { kind: "position", index: 1 },
        b: { kind: "position", index: 2 },
      },
    ],
    spans: [[0, 30]],
    changed_positions: [1, 2],
    history_length: 1,
    ...overrides,
  };
}

export function sampleSummary(task: string, cue: string, index: number): SampleSummary {
  const sampleId = `${task}-${cue}-${String(index).padStart(4, "0")}`;
  return {
    sample_id: sampleId,
    task,
    cue,
    instruction: `instruction for ${sampleId}`,
    input_timeline: ["0001", "0002", "0003"],
    output_timeline: ["0002", "0001", "0003"],
    length: 3,
  };
}

/** A ServiceClient whose unstubbed methods fail loudly when called. */
export function stubClient(overrides: Partial<ServiceClient> = {}): ServiceClient {
  const unexpected = (name: string) => () =>
    Promise.reject(new Error(`unexpected ${name} call`));
  const base: ServiceClient = {
    base: "http://stub.local",
    health: vi.fn(async () => ({ status: "ok" })),
    listTemplates: vi.fn(async () => ({ templates: [] })),
    generate: vi.fn(unexpected("generate")),
    listDatasets: vi.fn(async () => ({ datasets: [] })),
    getDataset: vi.fn(unexpected("getDataset")),
    createSessionFromSample: vi.fn(unexpected("createSessionFromSample")),
    getSession: vi.fn(unexpected("getSession")),
    execute: vi.fn(unexpected("execute")),
    undo: vi.fn(unexpected("undo")),
  } as unknown as ServiceClient;
  return { ...base, ...overrides };
}
