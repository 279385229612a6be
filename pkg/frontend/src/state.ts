/** View state and its transitions, kept pure so they are trivially testable.
 *
 * The server owns the truth; the state here mirrors the last payload it sent.
 * Failed executes must leave the timeline untouched, and the local history
 * depth always tracks the server-reported history_length (the controller
 * re-syncs from GET /sessions/{id} if the two ever disagree).
 */

import type {
  AssetRecord,
  ExecutePayload,
  SampleSummary,
  SessionDetail,
  SessionPayload,
  SessionSource,
  UndoPayload,
} from "./api.js";

export interface ErrorBanner {
  kind: string;
  message: string;
  retryable: boolean;
}

export interface HistoryEntry {
  instruction: string;
  timeline: string[];
}

export interface ViewState {
  sessionId: string | null;
  collection: AssetRecord[];
  /** Current strip, exactly as last reported by the server. */
  timeline: string[];
  /** Strip at session creation; undoing everything returns here. */
  initial: string[];
  /** Text currently in the instruction box. */
  instruction: string;
  history: HistoryEntry[];
  /** True while an execute/undo round-trip is in flight. */
  pending: boolean;
  error: ErrorBanner | null;
  /** 1-based positions changed by the last edit, for diff highlighting. */
  highlights: number[];
  /** Character spans of the parsed op clauses in lastInstruction. */
  spans: [number, number][];
  lastInstruction: string | null;
  source: SessionSource | null;
}

export const initialState: ViewState = {
  sessionId: null,
  collection: [],
  timeline: [],
  initial: [],
  instruction: "",
  history: [],
  pending: false,
  error: null,
  highlights: [],
  spans: [],
  lastInstruction: null,
  source: null,
};

/** 1-based positions where two strips disagree (same rule the server uses). */
export function changedPositions(before: string[], after: string[]): number[] {
  const length = Math.max(before.length, after.length);
  const changed: number[] = [];
  for (let i = 0; i < length; i += 1) {
    if (before[i] !== after[i]) {
      changed.push(i + 1);
    }
  }
  return changed;
}

export function sessionLoaded(payload: SessionPayload): ViewState {
  return {
    ...initialState,
    sessionId: payload.session_id,
    collection: payload.collection,
    timeline: [...payload.timeline],
    initial: [...payload.timeline],
    source: payload.source,
  };
}

/** Re-sync from GET /sessions/{id} after a suspected drift. */
export function sessionRefreshed(state: ViewState, detail: SessionDetail): ViewState {
  const history = detail.history.map((entry) => ({
    instruction: entry.instruction,
    timeline: [...entry.timeline],
  }));
  const first = history.length > 0 ? history[0] : undefined;
  return {
    ...state,
    sessionId: detail.session_id,
    collection: detail.collection,
    timeline: [...detail.timeline],
    history,
    // The detail payload has no explicit initial strip; recover it only when
    // the history is empty (then the current strip is the initial one).
    initial: first === undefined ? [...detail.timeline] : state.initial,
    pending: false,
    source: detail.source,
  };
}

export function instructionEdited(state: ViewState, text: string): ViewState {
  return { ...state, instruction: text };
}

export function executeStarted(state: ViewState): ViewState {
  return { ...state, pending: true, error: null };
}

export function executeSucceeded(state: ViewState, payload: ExecutePayload): ViewState {
  const applied = state.instruction.trim();
  return {
    ...state,
    pending: false,
    error: null,
    timeline: [...payload.timeline],
    history: [...state.history, { instruction: applied, timeline: [...payload.timeline] }],
    highlights: [...payload.changed_positions],
    spans: payload.spans.map((span) => [span[0], span[1]]),
    lastInstruction: applied,
    instruction: "",
  };
}

/** The strip must not move on failure; only the banner changes. */
export function executeFailed(state: ViewState, error: ErrorBanner): ViewState {
  return { ...state, pending: false, error, highlights: [], spans: [], lastInstruction: null };
}

export function undoSucceeded(state: ViewState, payload: UndoPayload): ViewState {
  return {
    ...state,
    pending: false,
    error: null,
    timeline: [...payload.timeline],
    history: state.history.slice(0, -1),
    highlights: changedPositions(state.timeline, payload.timeline),
    spans: [],
    lastInstruction: null,
  };
}

export function errorCleared(state: ViewState): ViewState {
  return { ...state, error: null };
}

export function canUndo(state: ViewState): boolean {
  return state.sessionId !== null && !state.pending && state.history.length > 0;
}

export function canSubmit(state: ViewState): boolean {
  return state.sessionId !== null && !state.pending && state.instruction.trim().length > 0;
}

export interface SampleGroup {
  task: string;
  samples: SampleSummary[];
}

/** Bucket dataset samples by task/cue in first-seen order for the picker. */
export function groupSamples(samples: SampleSummary[]): SampleGroup[] {
  const order: string[] = [];
  const byKey = new Map<string, SampleSummary[]>();
  for (const sample of samples) {
    const key = `${sample.task}/${sample.cue}`;
    let bucket = byKey.get(key);
    if (bucket === undefined) {
      bucket = [];
      byKey.set(key, bucket);
      order.push(key);
    }
    bucket.push(sample);
  }
  return order.map((task) => ({ task, samples: byKey.get(task) ?? [] }));
}
