/** End-to-end against a real service process, exercising the same endpoints
 * the UI uses. Requires the Python package to be installed (pip install -e .)
 * so `python3 -m assembly_bench.cli serve` resolves.
 */

import { spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, AssemblyApi } from "../src/api.js";

const PORT = 8300 + (process.pid % 300);
const api = new AssemblyApi(`http://127.0.0.1:${PORT}`);
let server: ChildProcess | undefined;

async function waitForService(timeoutMs = 40_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      await api.health();
      return;
    } catch (err) {
      lastError = err;
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
  }
  throw new Error(`service never came up on port ${PORT}: ${String(lastError)}`);
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "assembly_bench.cli", "serve", "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForService();
});

afterAll(() => {
  server?.kill();
});

describe("instruction replay", () => {
  it("reproduces the gold output for every sample of a generated dataset", async () => {
    const { dataset_id } = await api.generate({ samples_per_task: 3, seed: 11 });
    const detail = await api.getDataset(dataset_id);
    expect(detail.samples).toHaveLength(24);
    for (const sample of detail.samples) {
      const session = await api.createSessionFromSample(dataset_id, sample.sample_id);
      expect(session.timeline).toEqual(sample.input_timeline);
      const result = await api.execute(session.session_id, sample.instruction);
      expect(result.timeline).toEqual(sample.output_timeline);
      expect(result.history_length).toBe(1);
    }
  });

  it("handles two-op instructions the same way", async () => {
    const { dataset_id } = await api.generate({
      samples_per_task: 1,
      seed: 5,
      compositional: true,
    });
    const detail = await api.getDataset(dataset_id);
    expect(detail.samples).toHaveLength(12);
    for (const sample of detail.samples) {
      const session = await api.createSessionFromSample(dataset_id, sample.sample_id);
      const result = await api.execute(session.session_id, sample.instruction);
      expect(result.timeline).toEqual(sample.output_timeline);
      expect(result.ops).toHaveLength(2);
      expect(result.spans).toHaveLength(2);
    }
  });
});

describe("undo chain", () => {
  const ASSETS = [
    { clip_id: "0001", caption: "a dog running on the beach", uri: null },
    { clip_id: "0002", caption: "a cat asleep on a chair", uri: null },
    { clip_id: "0003", caption: "waves breaking against rocks", uri: null },
    { clip_id: "0004", caption: "fireworks over the harbor", uri: null },
    { clip_id: "0005", caption: "a baker kneading dough", uri: null },
    { clip_id: "0006", caption: "a red kite in a clear sky", uri: null },
  ];
  const INITIAL = ["0001", "0002", "0003", "0004"];
  const EDITS = [
    "Swap the first and second clips",
    "Remove the first shot",
    "Delete the last clip",
    "Put the shot with ID 0005 at position 2",
  ];

  it("N applies followed by N undos restores the initial strip", async () => {
    const session = await api.createSession(ASSETS, INITIAL);
    const seen: string[][] = [INITIAL];
    for (const [i, instruction] of EDITS.entries()) {
      const result = await api.execute(session.session_id, instruction);
      expect(result.history_length).toBe(i + 1);
      seen.push(result.timeline);
    }
    for (let depth = EDITS.length - 1; depth >= 0; depth -= 1) {
      const result = await api.undo(session.session_id);
      expect(result.history_length).toBe(depth);
      expect(result.timeline).toEqual(seen[depth]);
    }
    const final = await api.getSession(session.session_id);
    expect(final.timeline).toEqual(INITIAL);
    expect(final.history_length).toBe(0);
  });

  it("refuses to undo past the beginning", async () => {
    const session = await api.createSession(ASSETS, INITIAL);
    const err = (await api.undo(session.session_id).catch((e: unknown) => e)) as ApiError;
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.kind).toBe("EmptyHistory");
  });
});

describe("rejected instructions", () => {
  it("reports a parse error and leaves the session untouched", async () => {
    const { dataset_id } = await api.generate({ samples_per_task: 1, seed: 2 });
    const detail = await api.getDataset(dataset_id);
    const sample = detail.samples[0];
    expect(sample).toBeDefined();
    if (sample === undefined) {
      return;
    }
    const session = await api.createSessionFromSample(dataset_id, sample.sample_id);
    const err = (await api
      .execute(session.session_id, "Please make it pop")
      .catch((e: unknown) => e)) as ApiError;
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.kind).toBe("Parse");
    const after = await api.getSession(session.session_id);
    expect(after.timeline).toEqual(sample.input_timeline);
    expect(after.history_length).toBe(0);
  });
});
