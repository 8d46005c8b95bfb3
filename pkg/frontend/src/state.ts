/** UI state container and the pure time arithmetic behind navigation.
 *
 * All mutation of the playhead goes through these helpers so the rest of
 * the app can trust two invariants: t stays inside [0, duration], and
 * annotations shown on screen always mirror the gateway's last response
 * (there is no optimistic local edit state).
 */

import type { EpisodeMeta, GatewayConfig, Segment } from "./api.js";

export interface PendingDialog {
  start: number;
  end: number;
  labelIndex: number;
  success: boolean;
}

/** Draft values while one panel row is being edited inline. */
export interface EditDraft {
  index: number;
  start: string;
  end: string;
  label: string;
  success: boolean;
  error: string | null;
}

export interface UiState {
  config: GatewayConfig | null;
  episodeId: string | null;
  meta: EpisodeMeta | null;
  /** Playhead in seconds relative to episode start; single source of truth. */
  t: number;
  playing: boolean;
  /** Set while a segment start has been marked but not yet closed. */
  pendingStart: number | null;
  /** Non-null while the label dialog is open. */
  dialog: PendingDialog | null;
  /** Last annotation state acknowledged by the gateway. */
  segments: Segment[];
  editing: EditDraft | null;
  /** Episode description from the dataset, shown in its own section. */
  description: string | null;
  /** Description stored in the annotation record; preserved across PUTs. */
  recordDescription: string | null;
  visibleChannels: Set<string>;
  /** Plot window per channel; defaults to the full episode. */
  plotWindow: { from: number; to: number } | null;
  error: string | null;
}

export function initialState(): UiState {
  return {
    config: null,
    episodeId: null,
    meta: null,
    t: 0,
    playing: false,
    pendingStart: null,
    dialog: null,
    segments: [],
    editing: null,
    description: null,
    recordDescription: null,
    visibleChannels: new Set(),
    plotWindow: null,
    error: null,
  };
}

export function clampTime(t: number, duration: number): number {
  if (!(t > 0)) return 0;
  return t > duration ? duration : t;
}

/** Step the playhead by a signed amount, clamped to the episode. */
export function stepTime(t: number, step: number, duration: number): number {
  return clampTime(t + step, duration);
}

/** Linear pixel-to-time mapping used by timeline scrubbing. */
export function pixelToTime(x: number, widthPx: number, duration: number): number {
  if (widthPx <= 0) return 0;
  return clampTime((x / widthPx) * duration, duration);
}

export function timeToFraction(t: number, duration: number): number {
  if (duration <= 0) return 0;
  const f = t / duration;
  return f < 0 ? 0 : f > 1 ? 1 : f;
}

/** Seconds formatted for display; not the canonical file form. */
export function formatTime(t: number): string {
  return `${t.toFixed(3)}s`;
}

/** Segments ordered by start as the panel and timeline present them. */
export function sortedSegments(segments: Segment[]): Segment[] {
  return [...segments].sort((a, b) => a.start - b.start || a.end - b.end);
}

/** Zoom a plot window about a focus time; factor <1 zooms in. */
export function zoomWindow(
  win: { from: number; to: number },
  focus: number,
  factor: number,
  duration: number,
): { from: number; to: number } {
  const span = (win.to - win.from) * factor;
  let from = focus - (focus - win.from) * factor;
  let to = from + span;
  if (from < 0) {
    to -= from;
    from = 0;
  }
  if (to > duration) {
    from -= to - duration;
    to = duration;
  }
  return { from: Math.max(0, from), to: Math.min(duration, to) };
}
