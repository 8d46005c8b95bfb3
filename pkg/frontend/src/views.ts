/** DOM construction for the five stacked sections.
 *
 * The shell (static skeleton) is built once; render functions rewrite
 * only the dynamic innards from the current state. Camera <img> sources
 * are deliberately not touched here; the controller updates them when a
 * seek settles so frame traffic stays coalesced.
 */

import type { EpisodeMeta, EpisodeSummary, GatewayConfig, SeriesResponse } from "./api.js";
import { ACTION_LABELS, Action, keyForAction } from "./keys.js";
import { UiState, formatTime, timeToFraction } from "./state.js";

export interface Els {
  root: HTMLElement;
  episodeSelect: HTMLSelectElement;
  errorBanner: HTMLElement;
  camerasStrip: HTMLElement;
  channelList: HTMLElement;
  plots: HTMLElement;
  description: HTMLElement;
  timeline: HTMLElement;
  controls: HTMLElement;
  panelBody: HTMLElement;
  dialog: HTMLElement;
}

const SVG_W = 600;
const SVG_H = 120;

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function buildShell(root: HTMLElement): Els {
  root.innerHTML = `
    <header id="topbar">
      <h1>robolabel</h1>
      <select id="episode-select"></select>
      <span id="clock"></span>
      <div id="error-banner" role="alert" hidden></div>
    </header>
    <main id="main-sections">
      <section id="cameras-section">
        <div id="cameras-strip"></div>
      </section>
      <section id="selector-section">
        <h2>Data Selector</h2>
        <ul id="channel-list"></ul>
      </section>
      <section id="plots-section">
        <div id="plots"></div>
      </section>
      <section id="description-section">
        <p id="episode-description"></p>
      </section>
      <section id="timeline-section">
        <div id="timeline"></div>
        <div id="controls"></div>
        <table id="annotation-panel">
          <thead>
            <tr><th>start</th><th>end</th><th>label</th><th>outcome</th><th></th></tr>
          </thead>
          <tbody></tbody>
        </table>
      </section>
    </main>
    <div id="label-dialog" hidden></div>
  `;
  const q = <T extends HTMLElement>(sel: string): T => {
    const el = root.querySelector<T>(sel);
    if (!el) throw new Error(`missing shell element ${sel}`);
    return el;
  };
  return {
    root,
    episodeSelect: q<HTMLSelectElement>("#episode-select"),
    errorBanner: q("#error-banner"),
    camerasStrip: q("#cameras-strip"),
    channelList: q("#channel-list"),
    plots: q("#plots"),
    description: q("#episode-description"),
    timeline: q("#timeline"),
    controls: q("#controls"),
    panelBody: q("#annotation-panel tbody"),
    dialog: q("#label-dialog"),
  };
}

export function renderEpisodeSelect(els: Els, episodes: EpisodeSummary[], current: string | null): void {
  els.episodeSelect.innerHTML = episodes
    .map((ep) => `<option value="${esc(ep.id)}"${ep.id === current ? " selected" : ""}>${esc(ep.id)}</option>`)
    .join("");
}

/** One figure per camera, side by side; img src is set by the controller. */
export function renderCameras(els: Els, meta: EpisodeMeta): void {
  els.camerasStrip.innerHTML = meta.cameras
    .map(
      (cam) => `
      <figure class="camera">
        <img class="camera-frame" data-camera="${esc(cam.name)}" alt="${esc(cam.name)}">
        <figcaption>${esc(cam.name)}</figcaption>
      </figure>`,
    )
    .join("");
}

export function renderSelector(els: Els, meta: EpisodeMeta, visible: Set<string>): void {
  els.channelList.innerHTML = meta.channels
    .map((ch) => {
      const unit = ch.unit ? ` <span class="unit">[${esc(ch.unit)}]</span>` : "";
      return `
      <li>
        <label>
          <input type="checkbox" class="channel-toggle" data-channel="${esc(ch.name)}"${visible.has(ch.name) ? " checked" : ""}>
          ${esc(ch.name)}${unit}
        </label>
      </li>`;
    })
    .join("");
}

function polyline(points: number[][], dim: number, win: { from: number; to: number }, lo: number, hi: number): string {
  const span = win.to - win.from || 1;
  const range = hi - lo || 1;
  const coords = points
    .map((row) => {
      const x = ((row[0] - win.from) / span) * SVG_W;
      const y = SVG_H - 10 - ((row[dim + 1] - lo) / range) * (SVG_H - 20);
      return `${x.toFixed(2)},${y.toFixed(2)}`;
    })
    .join(" ");
  return `<polyline class="series-line dim-${dim}" fill="none" points="${coords}"/>`;
}

export function renderPlots(
  els: Els,
  state: UiState,
  series: Map<string, SeriesResponse>,
): void {
  const meta = state.meta;
  const win = state.plotWindow;
  if (!meta || !win) {
    els.plots.innerHTML = "";
    return;
  }
  const parts: string[] = [];
  for (const ch of meta.channels) {
    if (!state.visibleChannels.has(ch.name)) continue;
    const resp = series.get(ch.name);
    let body = "";
    if (resp && resp.points.length > 0) {
      let lo = Infinity;
      let hi = -Infinity;
      for (const row of resp.points) {
        for (let d = 1; d < row.length; d++) {
          if (row[d] < lo) lo = row[d];
          if (row[d] > hi) hi = row[d];
        }
      }
      for (let d = 0; d < resp.dims; d++) body += polyline(resp.points, d, win, lo, hi);
    }
    const span = win.to - win.from || 1;
    const cx = ((state.t - win.from) / span) * SVG_W;
    const badge = resp?.downsampled ? `<span class="downsampled-badge">downsampled</span>` : "";
    parts.push(`
      <figure class="plot" data-channel="${esc(ch.name)}">
        <div class="plot-head">
          <span class="plot-title">${esc(ch.name)}</span>${badge}
          <button class="zoom-in" data-channel="${esc(ch.name)}">+</button>
          <button class="zoom-out" data-channel="${esc(ch.name)}">&minus;</button>
          <button class="zoom-reset" data-channel="${esc(ch.name)}">fit</button>
        </div>
        <svg viewBox="0 0 ${SVG_W} ${SVG_H}" preserveAspectRatio="none">
          ${body}
          <line class="plot-cursor" x1="${cx.toFixed(2)}" x2="${cx.toFixed(2)}" y1="0" y2="${SVG_H}"/>
        </svg>
        <div class="plot-window">${formatTime(win.from)} &ndash; ${formatTime(win.to)}</div>
      </figure>`);
  }
  els.plots.innerHTML = parts.join("");
}

export function renderDescription(els: Els, state: UiState): void {
  els.description.textContent = state.description ?? "";
}

export function renderTimeline(els: Els, state: UiState): void {
  const duration = state.meta?.duration ?? 0;
  const spans = state.segments
    .map((seg, i) => {
      const left = timeToFraction(seg.start, duration) * 100;
      const width = (timeToFraction(seg.end, duration) - timeToFraction(seg.start, duration)) * 100;
      return `<div class="timeline-span" data-idx="${i}" title="${esc(seg.label)}" style="left:${left}%;width:${width}%">${esc(seg.label)}</div>`;
    })
    .join("");
  let pending = "";
  if (state.pendingStart !== null) {
    const a = Math.min(state.pendingStart, state.t);
    const b = Math.max(state.pendingStart, state.t);
    const left = timeToFraction(a, duration) * 100;
    const width = (timeToFraction(b, duration) - timeToFraction(a, duration)) * 100;
    pending = `<div id="pending-overlay" class="pending-overlay" style="left:${left}%;width:${width}%"></div>`;
  }
  const head = timeToFraction(state.t, duration) * 100;
  els.timeline.innerHTML = `${spans}${pending}<div id="playhead-marker" style="left:${head}%"></div>`;
}

export function renderControls(els: Els, config: GatewayConfig): void {
  const order: Action[] = [
    "toggle_segment",
    "play_pause",
    "step_backward_fast",
    "step_backward_slow",
    "step_forward_slow",
    "step_forward_fast",
    "cancel_pending",
  ];
  els.controls.innerHTML = order
    .map((action) => {
      const key = keyForAction(config.shortcuts, action);
      const hint = key ? ` (${esc(key)})` : "";
      return `<button class="control" data-action="${action}">${esc(ACTION_LABELS[action])}${hint}</button>`;
    })
    .join("");
}

export function renderPanel(els: Els, state: UiState, labelSet: string[]): void {
  const rows = state.segments.map((seg, i) => {
    const editing = state.editing;
    if (editing && editing.index === i) {
      const options = labelSet
        .map((l) => `<option value="${esc(l)}"${l === editing.label ? " selected" : ""}>${esc(l)}</option>`)
        .join("");
      const err = editing.error ? `<div class="row-error">${esc(editing.error)}</div>` : "";
      return `
        <tr class="editing" data-idx="${i}">
          <td><input class="edit-start" value="${esc(editing.start)}"></td>
          <td><input class="edit-end" value="${esc(editing.end)}"></td>
          <td><select class="edit-label">${options}</select></td>
          <td><label><input type="checkbox" class="edit-success"${editing.success ? " checked" : ""}> success</label></td>
          <td>
            <button class="save-edit" data-idx="${i}">save</button>
            <button class="cancel-edit" data-idx="${i}">cancel</button>
            ${err}
          </td>
        </tr>`;
    }
    const outcome = seg.success
      ? `<span class="outcome-success">✓</span>`
      : `<span class="outcome-failure">✗</span>`;
    return `
      <tr data-idx="${i}">
        <td class="seg-start">${formatTime(seg.start)}</td>
        <td class="seg-end">${formatTime(seg.end)}</td>
        <td class="seg-label">${esc(seg.label)}</td>
        <td class="seg-outcome">${outcome}</td>
        <td>
          <button class="edit-seg" data-idx="${i}">edit</button>
          <button class="delete-seg" data-idx="${i}">delete</button>
        </td>
      </tr>`;
  });
  els.panelBody.innerHTML = rows.join("");
}

export function renderDialog(els: Els, state: UiState, labelSet: string[]): void {
  const dlg = state.dialog;
  if (!dlg) {
    els.dialog.hidden = true;
    els.dialog.innerHTML = "";
    return;
  }
  const labels = labelSet
    .map(
      (l, i) =>
        `<li class="label-option${i === dlg.labelIndex ? " selected" : ""}" data-idx="${i}">${i + 1}. ${esc(l)}</li>`,
    )
    .join("");
  const outcome = dlg.success
    ? `<span class="outcome-success">✓ success</span>`
    : `<span class="outcome-failure">✗ failure</span>`;
  const err = state.error ? `<div class="dialog-error">${esc(state.error)}</div>` : "";
  els.dialog.innerHTML = `
    <div class="dialog-box">
      <p class="dialog-range">${formatTime(dlg.start)} &ndash; ${formatTime(dlg.end)}</p>
      <ul class="dialog-labels">${labels}</ul>
      <p class="dialog-success" id="dialog-success">Outcome: ${outcome} <small>(s toggles)</small></p>
      <p class="dialog-hint">enter confirms, esc dismisses</p>
      ${err}
    </div>`;
  els.dialog.hidden = false;
}

export function renderError(els: Els, state: UiState): void {
  if (state.error && !state.dialog) {
    els.errorBanner.textContent = state.error;
    els.errorBanner.hidden = false;
  } else {
    els.errorBanner.textContent = "";
    els.errorBanner.hidden = true;
  }
}

export function renderClock(els: Els, state: UiState): void {
  const clock = els.root.querySelector<HTMLElement>("#clock");
  if (clock) clock.textContent = `t = ${formatTime(state.t)}${state.playing ? " ▶" : ""}`;
}
