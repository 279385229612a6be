/** DOM rendering and the controller that ties the view state to the service.
 *
 * Renderers are plain functions over elements so they can be exercised under
 * jsdom without the controller; the App class owns the ViewState, performs
 * the HTTP round-trips, and re-renders after every transition. At most one
 * execute/undo request is in flight at a time: the instruction box and both
 * buttons are disabled while state.pending is set.
 */

import { ApiError } from "./api.js";
import type {
  AssemblyApi,
  AssetRecord,
  SampleSummary,
  TemplateRecord,
} from "./api.js";
import {
  canSubmit,
  canUndo,
  errorCleared,
  executeFailed,
  executeStarted,
  executeSucceeded,
  groupSamples,
  initialState,
  instructionEdited,
  sessionLoaded,
  sessionRefreshed,
  undoSucceeded,
} from "./state.js";
import type { ErrorBanner, ViewState } from "./state.js";
import { suggestTemplates } from "./suggest.js";

/** The service surface the controller needs; AssemblyApi satisfies it. */
export type ServiceClient = Pick<
  AssemblyApi,
  | "base"
  | "health"
  | "listTemplates"
  | "generate"
  | "listDatasets"
  | "getDataset"
  | "createSessionFromSample"
  | "getSession"
  | "execute"
  | "undo"
>;

export interface AppElements {
  status: HTMLElement;
  generate: HTMLButtonElement;
  picker: HTMLElement;
  sessionLabel: HTMLElement;
  error: HTMLElement;
  timeline: HTMLElement;
  lastOp: HTMLElement;
  instruction: HTMLInputElement;
  suggestions: HTMLElement;
  apply: HTMLButtonElement;
  undo: HTMLButtonElement;
  history: HTMLElement;
  collection: HTMLElement;
}

const ELEMENT_IDS: Record<keyof AppElements, string> = {
  status: "api-status",
  generate: "btn-generate",
  picker: "picker",
  sessionLabel: "session-label",
  error: "error-banner",
  timeline: "timeline",
  lastOp: "last-op",
  instruction: "instruction",
  suggestions: "suggestions",
  apply: "btn-apply",
  undo: "btn-undo",
  history: "history",
  collection: "collection",
};

export function findElements(doc: Document): AppElements {
  const found: Partial<Record<keyof AppElements, HTMLElement>> = {};
  const missing: string[] = [];
  for (const [key, id] of Object.entries(ELEMENT_IDS)) {
    const el = doc.getElementById(id);
    if (el === null) {
      missing.push(id);
    } else {
      found[key as keyof AppElements] = el;
    }
  }
  if (missing.length > 0) {
    throw new Error(`page is missing required elements: ${missing.join(", ")}`);
  }
  return found as unknown as AppElements;
}

function clear(el: HTMLElement): void {
  el.textContent = "";
}

function child(el: HTMLElement, tag: string, className?: string, text?: string): HTMLElement {
  const node = el.ownerDocument.createElement(tag);
  if (className !== undefined) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  el.appendChild(node);
  return node;
}

/** Thumbnails only make sense for addresses a browser can actually load. */
export function displayableUri(uri: string | null): boolean {
  if (uri === null) {
    return false;
  }
  return uri.startsWith("http://") || uri.startsWith("https://") || uri.startsWith("data:");
}

export function renderTimeline(
  el: HTMLElement,
  timeline: string[],
  collection: AssetRecord[],
  highlights: number[],
): void {
  clear(el);
  if (timeline.length === 0) {
    child(el, "div", "empty", "timeline is empty");
    return;
  }
  const captions = new Map(collection.map((a) => [a.clip_id, a.caption]));
  timeline.forEach((clipId, i) => {
    const card = child(el, "div", "card");
    if (highlights.includes(i + 1)) {
      card.classList.add("changed");
    }
    card.dataset["clipId"] = clipId;
    child(card, "div", "pos", String(i + 1));
    child(card, "div", "clip-id", clipId);
    child(card, "div", "caption", captions.get(clipId) ?? "(not in collection)");
  });
}

export function renderCollection(
  el: HTMLElement,
  assets: AssetRecord[],
  usedIds: Set<string>,
): void {
  clear(el);
  if (assets.length === 0) {
    child(el, "div", "empty", "no collection loaded");
    return;
  }
  for (const asset of assets) {
    const card = child(el, "div", "asset");
    if (usedIds.has(asset.clip_id)) {
      card.classList.add("used");
    }
    if (displayableUri(asset.uri)) {
      const img = card.ownerDocument.createElement("img");
      img.src = asset.uri as string;
      img.alt = asset.caption;
      img.addEventListener("error", () => img.remove());
      card.appendChild(img);
    }
    const header = child(card, "div", "asset-header");
    child(header, "span", "clip-id", asset.clip_id);
    if (usedIds.has(asset.clip_id)) {
      child(header, "span", "chip", "in timeline");
    }
    child(card, "div", "caption", asset.caption);
  }
}

export function renderError(
  el: HTMLElement,
  banner: ErrorBanner | null,
  onRetry: () => void,
): void {
  clear(el);
  if (banner === null) {
    el.classList.add("hidden");
    return;
  }
  el.classList.remove("hidden");
  child(el, "span", "kind", banner.kind);
  child(el, "span", "message", banner.message);
  if (banner.retryable) {
    const button = child(el, "button", "retry", "Retry") as HTMLButtonElement;
    button.type = "button";
    button.addEventListener("click", onRetry);
  }
}

export function renderHistory(el: HTMLElement, entries: { instruction: string }[]): void {
  clear(el);
  if (entries.length === 0) {
    child(el, "div", "empty", "no edits yet");
    return;
  }
  const list = child(el, "ol");
  for (const entry of entries) {
    child(list, "li", undefined, entry.instruction);
  }
}

/** The last applied instruction with each parsed op clause marked. */
export function renderParsedInstruction(
  el: HTMLElement,
  text: string | null,
  spans: [number, number][],
): void {
  clear(el);
  if (text === null) {
    el.classList.add("hidden");
    return;
  }
  el.classList.remove("hidden");
  child(el, "span", "label", "applied: ");
  const doc = el.ownerDocument;
  let cursor = 0;
  const ordered = [...spans].sort((a, b) => a[0] - b[0]);
  for (const [start, end] of ordered) {
    if (start < cursor || end > text.length || start >= end) {
      continue;
    }
    if (start > cursor) {
      el.appendChild(doc.createTextNode(text.slice(cursor, start)));
    }
    child(el, "mark", undefined, text.slice(start, end));
    cursor = end;
  }
  if (cursor < text.length) {
    el.appendChild(doc.createTextNode(text.slice(cursor)));
  }
}

export function renderSuggestions(
  el: HTMLElement,
  patterns: string[],
  onPick: (pattern: string) => void,
): void {
  clear(el);
  if (patterns.length === 0) {
    el.classList.add("hidden");
    return;
  }
  el.classList.remove("hidden");
  for (const pattern of patterns) {
    const button = child(el, "button", "suggestion", pattern) as HTMLButtonElement;
    button.type = "button";
    button.dataset["pattern"] = pattern;
    button.addEventListener("click", () => onPick(pattern));
  }
}

export function renderPicker(
  el: HTMLElement,
  datasetId: string | null,
  samples: SampleSummary[],
  onLoad: (sampleId: string) => void,
): void {
  clear(el);
  if (datasetId === null) {
    child(el, "div", "empty", "no dataset yet - generate one to browse samples");
    return;
  }
  child(el, "div", "picker-title", `${datasetId} - ${samples.length} samples`);
  for (const group of groupSamples(samples)) {
    const details = child(el, "details", "task-group") as HTMLDetailsElement;
    child(details, "summary", undefined, `${group.task} (${group.samples.length})`);
    for (const sample of group.samples) {
      const row = child(details, "div", "sample-row");
      row.dataset["sampleId"] = sample.sample_id;
      const button = child(row, "button", "load", "Load") as HTMLButtonElement;
      button.type = "button";
      button.addEventListener("click", () => onLoad(sample.sample_id));
      const body = child(row, "div", "sample-body");
      child(body, "div", "instruction", sample.instruction);
      child(
        body,
        "div",
        "gold",
        `${sample.input_timeline.join(" ")} → ${sample.output_timeline.join(" ")}`,
      );
    }
  }
}

export function bannerFromError(err: unknown): ErrorBanner {
  if (err instanceof ApiError) {
    return { kind: err.kind, message: err.message, retryable: err.kind === "Network" };
  }
  return { kind: "Internal", message: String(err), retryable: false };
}

export class App {
  state: ViewState = initialState;
  datasetId: string | null = null;
  samples: SampleSummary[] = [];
  private patterns: string[] = [];
  private lastAction: (() => Promise<void>) | null = null;

  constructor(
    private readonly els: AppElements,
    private readonly api: ServiceClient,
  ) {}

  /** Health check plus template corpus; neither failure is fatal. */
  async start(): Promise<void> {
    try {
      await this.api.health();
      this.els.status.textContent = `connected to ${this.api.base}`;
      this.els.status.classList.add("ok");
    } catch (err) {
      this.els.status.textContent = `service unreachable at ${this.api.base}`;
      this.els.status.classList.remove("ok");
      this.state = { ...this.state, error: bannerFromError(err) };
      this.lastAction = () => this.start();
      this.render();
      return;
    }
    try {
      const { templates } = await this.api.listTemplates();
      this.patterns = templates.map((t: TemplateRecord) => t.pattern);
    } catch {
      this.patterns = [];
    }
    try {
      const { datasets } = await this.api.listDatasets();
      const last = datasets[datasets.length - 1];
      if (last !== undefined) {
        await this.browseDataset(last.dataset_id);
      }
    } catch {
      // browsing is best-effort; the generate button still works
    }
    this.render();
  }

  async generateDataset(): Promise<void> {
    this.lastAction = () => this.generateDataset();
    this.els.generate.disabled = true;
    try {
      const { dataset_id } = await this.api.generate({ samples_per_task: 2 });
      await this.browseDataset(dataset_id);
    } catch (err) {
      this.state = { ...this.state, error: bannerFromError(err) };
    } finally {
      this.els.generate.disabled = false;
    }
    this.render();
  }

  async browseDataset(datasetId: string): Promise<void> {
    const detail = await this.api.getDataset(datasetId);
    this.datasetId = detail.dataset_id;
    this.samples = detail.samples;
    this.render();
  }

  async loadSample(sampleId: string): Promise<void> {
    if (this.datasetId === null) {
      return;
    }
    const datasetId = this.datasetId;
    this.lastAction = () => this.loadSample(sampleId);
    try {
      const payload = await this.api.createSessionFromSample(datasetId, sampleId);
      this.state = sessionLoaded(payload);
    } catch (err) {
      this.state = { ...this.state, error: bannerFromError(err) };
    }
    this.render();
  }

  async apply(): Promise<void> {
    if (!canSubmit(this.state)) {
      return;
    }
    const sessionId = this.state.sessionId as string;
    const instruction = this.state.instruction;
    this.lastAction = () => this.apply();
    this.state = executeStarted(this.state);
    this.render();
    try {
      const payload = await this.api.execute(sessionId, instruction);
      this.state = executeSucceeded(this.state, payload);
      if (this.state.history.length !== payload.history_length) {
        await this.refresh();
      }
    } catch (err) {
      this.state = executeFailed(this.state, bannerFromError(err));
    }
    this.render();
  }

  async undoLast(): Promise<void> {
    if (!canUndo(this.state)) {
      return;
    }
    const sessionId = this.state.sessionId as string;
    this.lastAction = () => this.undoLast();
    this.state = executeStarted(this.state);
    this.render();
    try {
      const payload = await this.api.undo(sessionId);
      this.state = undoSucceeded(this.state, payload);
      if (this.state.history.length !== payload.history_length) {
        await this.refresh();
      }
    } catch (err) {
      this.state = executeFailed(this.state, bannerFromError(err));
    }
    this.render();
  }

  /** Pull the authoritative session state back from the server. */
  async refresh(): Promise<void> {
    if (this.state.sessionId === null) {
      return;
    }
    const detail = await this.api.getSession(this.state.sessionId);
    this.state = sessionRefreshed(this.state, detail);
  }

  retry(): void {
    const action = this.lastAction;
    this.state = errorCleared(this.state);
    this.render();
    if (action !== null) {
      void action();
    }
  }

  onInstructionInput(text: string): void {
    this.state = instructionEdited(this.state, text);
    this.render();
  }

  pickSuggestion(pattern: string): void {
    this.state = instructionEdited(this.state, pattern);
    this.render();
    this.els.instruction.focus();
  }

  render(): void {
    const { state, els } = this;
    const used = new Set(state.timeline);
    renderTimeline(els.timeline, state.timeline, state.collection, state.highlights);
    renderCollection(els.collection, state.collection, used);
    renderHistory(els.history, state.history);
    renderError(els.error, state.error, () => this.retry());
    renderParsedInstruction(els.lastOp, state.lastInstruction, state.spans);
    renderPicker(els.picker, this.datasetId, this.samples, (sampleId) => {
      void this.loadSample(sampleId);
    });
    if (els.instruction.value !== state.instruction) {
      els.instruction.value = state.instruction;
    }
    els.instruction.disabled = state.pending || state.sessionId === null;
    els.apply.disabled = !canSubmit(state);
    els.undo.disabled = !canUndo(state);
    renderSuggestions(
      els.suggestions,
      state.sessionId === null ? [] : suggestTemplates(this.patterns, state.instruction),
      (pattern) => this.pickSuggestion(pattern),
    );
    if (state.sessionId === null) {
      els.sessionLabel.textContent = "no session - load a sample from the browser below";
    } else {
      const origin =
        state.source === null ? "inline assets" : `${state.source.dataset_id}/${state.source.sample_id}`;
      els.sessionLabel.textContent = `session ${state.sessionId} (${origin}), ${state.history.length} edit(s)`;
    }
  }
}

export function mount(doc: Document, api: ServiceClient): App {
  const els = findElements(doc);
  const app = new App(els, api);
  els.instruction.addEventListener("input", () => {
    app.onInstructionInput(els.instruction.value);
  });
  els.instruction.addEventListener("keydown", (event) => {
    if ((event as KeyboardEvent).key === "Enter") {
      event.preventDefault();
      void app.apply();
    }
  });
  els.apply.addEventListener("click", () => {
    void app.apply();
  });
  els.undo.addEventListener("click", () => {
    void app.undoLast();
  });
  els.generate.addEventListener("click", () => {
    void app.generateDataset();
  });
  app.render();
  return app;
}
