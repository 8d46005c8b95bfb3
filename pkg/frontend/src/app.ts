/** Controller: wires the gateway client, keyboard handling, playback
 * clock, and seek coalescing around a single UiState.
 *
 * Two rules hold everywhere. The playhead t is the only clock; every
 * view derives from it. And annotations never change locally before the
 * gateway acknowledges a PUT; a rejected write leaves the screen
 * exactly as it was, plus an inline error.
 */

import { ApiClient, EpisodeRecord, GatewayError, Segment, SeriesResponse } from "./api.js";
import { Action, resolveAction } from "./keys.js";
import {
  UiState,
  clampTime,
  initialState,
  pixelToTime,
  sortedSegments,
  stepTime,
  zoomWindow,
} from "./state.js";
import {
  Els,
  buildShell,
  renderCameras,
  renderClock,
  renderControls,
  renderDescription,
  renderDialog,
  renderEpisodeSelect,
  renderError,
  renderPanel,
  renderPlots,
  renderSelector,
  renderTimeline,
} from "./views.js";

/** Quiet period after the last seek before frames and series refresh. */
export const SETTLE_MS = 80;

const FALLBACK_FPS = 30;

export class App {
  state: UiState = initialState();
  client: ApiClient;
  els: Els;
  series = new Map<string, SeriesResponse>();
  /** Number of settles so far; tests use it to assert coalescing. */
  settleCount = 0;

  private seriesSeq = 0;
  private settleTimer: ReturnType<typeof setTimeout> | null = null;
  private playTimer: ReturnType<typeof setInterval> | null = null;
  private episodes: { id: string; duration: number | null }[] = [];
  private readonly keydownListener = (ev: KeyboardEvent) => this.handleKeydown(ev);

  constructor(root: HTMLElement, client: ApiClient) {
    this.client = client;
    this.els = buildShell(root);
    this.wireEvents();
  }

  /** Detach global hooks; the app stops reacting to input. */
  destroy(): void {
    document.removeEventListener("keydown", this.keydownListener);
    this.stopPlayback();
    if (this.settleTimer !== null) {
      clearTimeout(this.settleTimer);
      this.settleTimer = null;
    }
  }

  async start(): Promise<void> {
    this.state.config = await this.client.config();
    this.episodes = await this.client.episodes();
    renderEpisodeSelect(this.els, this.episodes, null);
    renderControls(this.els, this.state.config);
    if (this.episodes.length === 0) {
      this.state.error = "no episodes in dataset";
      renderError(this.els, this.state);
      return;
    }
    await this.selectEpisode(this.episodes[0].id);
  }

  async selectEpisode(id: string): Promise<void> {
    this.stopPlayback();
    const meta = await this.client.episodeMeta(id);
    const record = await this.client.annotations(id);
    const s = this.state;
    s.episodeId = id;
    s.meta = meta;
    s.t = 0;
    s.pendingStart = null;
    s.dialog = null;
    s.editing = null;
    s.error = null;
    s.segments = sortedSegments(record.segments);
    s.recordDescription = record.description ?? null;
    s.description = meta.description;
    s.visibleChannels = new Set(meta.channels.filter((c) => c.default_visible).map((c) => c.name));
    s.plotWindow = { from: 0, to: meta.duration };
    this.series.clear();
    renderEpisodeSelect(this.els, this.episodes, id);
    renderCameras(this.els, meta);
    renderSelector(this.els, meta, s.visibleChannels);
    renderDescription(this.els, s);
    await this.refreshSeries();
    this.render();
    this.settleNow();
  }

  render(): void {
    const s = this.state;
    if (!s.config || !s.meta) return;
    renderPlots(this.els, s, this.series);
    renderTimeline(this.els, s);
    renderPanel(this.els, s, s.config.label_set);
    renderDialog(this.els, s, s.config.label_set);
    renderError(this.els, s);
    renderClock(this.els, s);
  }

  // -- time ---------------------------------------------------------------

  get duration(): number {
    return this.state.meta?.duration ?? 0;
  }

  setTime(t: number, settle: "debounce" | "now" = "debounce"): void {
    this.state.t = clampTime(t, this.duration);
    this.render();
    if (settle === "now") this.settleNow();
    else this.scheduleSettle();
  }

  private scheduleSettle(): void {
    if (this.settleTimer !== null) clearTimeout(this.settleTimer);
    this.settleTimer = setTimeout(() => {
      this.settleTimer = null;
      this.settleNow();
    }, SETTLE_MS);
  }

  /** Seek settled: point every camera at the new frame and, when not
   * playing, refresh the numeric snapshot under the cursor. */
  settleNow(): void {
    const s = this.state;
    if (!s.episodeId || !s.meta) return;
    this.settleCount += 1;
    const imgs = this.els.camerasStrip.querySelectorAll<HTMLImageElement>("img.camera-frame");
    imgs.forEach((img) => {
      const cam = img.dataset.camera;
      if (cam) img.src = this.client.frameUrl(s.episodeId!, cam, s.t);
    });
    if (!s.playing) void this.refreshSeries();
  }

  // -- playback -----------------------------------------------------------

  private get fps(): number {
    return this.state.config?.video_fps ?? FALLBACK_FPS;
  }

  private startPlayback(): void {
    if (this.playTimer !== null) return;
    this.state.playing = true;
    const dt = 1 / this.fps;
    this.playTimer = setInterval(() => {
      const next = this.state.t + dt;
      if (next >= this.duration) {
        this.setTime(this.duration, "now");
        this.stopPlayback();
        this.render();
      } else {
        this.setTime(next, "now");
      }
    }, 1000 / this.fps);
  }

  private stopPlayback(): void {
    if (this.playTimer !== null) {
      clearInterval(this.playTimer);
      this.playTimer = null;
    }
    this.state.playing = false;
  }

  // -- keyboard -----------------------------------------------------------

  handleKeydown(ev: KeyboardEvent): void {
    const s = this.state;
    if (!s.config) return;
    const target = ev.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "SELECT" || target.tagName === "TEXTAREA")) {
      return; // typing in a field must not trigger shortcuts
    }
    if (s.dialog) {
      this.dialogKeydown(ev);
      return;
    }
    const action = resolveAction(s.config.shortcuts, ev.key);
    if (action === null) return; // unbound keys are ignored entirely
    ev.preventDefault();
    this.dispatch(action);
  }

  dispatch(action: Action): void {
    const s = this.state;
    if (!s.config || !s.meta) return;
    switch (action) {
      case "toggle_segment":
        this.toggleSegment();
        break;
      case "play_pause":
        if (s.playing) this.stopPlayback();
        else this.startPlayback();
        this.render();
        break;
      case "step_forward_fast":
        this.setTime(stepTime(s.t, s.config.nav_fast_step, this.duration));
        break;
      case "step_backward_fast":
        this.setTime(stepTime(s.t, -s.config.nav_fast_step, this.duration));
        break;
      case "step_forward_slow":
        this.setTime(stepTime(s.t, s.config.nav_slow_step, this.duration));
        break;
      case "step_backward_slow":
        this.setTime(stepTime(s.t, -s.config.nav_slow_step, this.duration));
        break;
      case "cancel_pending":
        s.pendingStart = null;
        s.dialog = null;
        s.error = null;
        this.render();
        break;
    }
  }

  private toggleSegment(): void {
    const s = this.state;
    if (s.pendingStart === null) {
      s.pendingStart = s.t;
      s.error = null;
    } else if (s.pendingStart === s.t) {
      s.error = "segment needs a nonzero length";
    } else {
      s.dialog = {
        start: Math.min(s.pendingStart, s.t),
        end: Math.max(s.pendingStart, s.t),
        labelIndex: 0,
        success: true,
      };
      s.error = null;
    }
    this.render();
  }

  private dialogKeydown(ev: KeyboardEvent): void {
    const s = this.state;
    const dlg = s.dialog;
    const labels = s.config?.label_set ?? [];
    if (!dlg) return;
    const key = ev.key;
    if (key === "Escape") {
      // dismiss the dialog but keep the marked start
      s.dialog = null;
      s.error = null;
      this.render();
    } else if (key === "Enter") {
      void this.confirmDialog();
    } else if (key === "ArrowDown") {
      dlg.labelIndex = (dlg.labelIndex + 1) % labels.length;
      this.render();
    } else if (key === "ArrowUp") {
      dlg.labelIndex = (dlg.labelIndex + labels.length - 1) % labels.length;
      this.render();
    } else if (key.toLowerCase() === "s") {
      dlg.success = !dlg.success;
      this.render();
    } else if (/^[1-9]$/.test(key)) {
      const idx = Number(key) - 1;
      if (idx < labels.length) {
        dlg.labelIndex = idx;
        this.render();
      }
    } else {
      return; // other keys do nothing while the dialog is up
    }
    ev.preventDefault();
  }

  async confirmDialog(): Promise<void> {
    const s = this.state;
    const dlg = s.dialog;
    if (!dlg || !s.config) return;
    const seg: Segment = {
      start: dlg.start,
      end: dlg.end,
      label: s.config.label_set[dlg.labelIndex],
      success: dlg.success,
    };
    const ok = await this.putSegments([...s.segments, seg]);
    if (ok) {
      s.dialog = null;
      s.pendingStart = null;
    }
    this.render();
  }

  // -- annotation writes ----------------------------------------------------

  /** PUT the record; mirror the ack on success, surface the rejection
   * otherwise. Never touches state.segments on failure. */
  private async putSegments(segments: Segment[]): Promise<boolean> {
    const s = this.state;
    if (!s.episodeId) return false;
    const body: EpisodeRecord = { segments };
    if (s.recordDescription !== null) body.description = s.recordDescription;
    try {
      const ack = await this.client.putAnnotations(s.episodeId, body);
      s.segments = sortedSegments(ack.segments);
      s.recordDescription = ack.description ?? null;
      s.error = null;
      return true;
    } catch (err) {
      s.error = err instanceof GatewayError ? err.message : String(err);
      return false;
    }
  }

  beginEdit(index: number): void {
    const seg = this.state.segments[index];
    if (!seg) return;
    this.state.editing = {
      index,
      start: String(seg.start),
      end: String(seg.end),
      label: seg.label,
      success: seg.success,
      error: null,
    };
    this.render();
  }

  cancelEdit(): void {
    this.state.editing = null;
    this.render();
  }

  async saveEdit(): Promise<void> {
    const s = this.state;
    const draft = s.editing;
    if (!draft) return;
    const start = Number(draft.start);
    const end = Number(draft.end);
    if (!Number.isFinite(start) || !Number.isFinite(end)) {
      draft.error = "start and end must be numbers";
      this.render();
      return;
    }
    const next = s.segments.map((seg, i) =>
      i === draft.index ? { start, end, label: draft.label, success: draft.success } : seg,
    );
    const ok = await this.putSegments(next);
    if (ok) {
      s.editing = null;
    } else {
      draft.error = s.error;
      s.error = null; // shown at the row, not the banner
    }
    this.render();
  }

  async deleteSegment(index: number): Promise<void> {
    const s = this.state;
    const next = s.segments.filter((_, i) => i !== index);
    await this.putSegments(next);
    this.render();
  }

  // -- selector and plots ---------------------------------------------------

  async toggleChannel(name: string, visible: boolean): Promise<void> {
    const s = this.state;
    if (visible) s.visibleChannels.add(name);
    else s.visibleChannels.delete(name);
    if (visible && !this.series.has(name)) await this.refreshSeries([name]);
    this.render();
  }

  /** Re-fetch plot data for the current window; stale responses (an
   * older window answered after a newer request) are dropped. */
  async refreshSeries(only?: string[]): Promise<void> {
    const s = this.state;
    if (!s.episodeId || !s.plotWindow) return;
    const names = only ?? [...s.visibleChannels];
    const seq = ++this.seriesSeq;
    const { from, to } = s.plotWindow;
    await Promise.all(
      names.map(async (name) => {
        try {
          const resp = await this.client.series(s.episodeId!, name, from, to);
          if (seq === this.seriesSeq) this.series.set(name, resp);
        } catch {
          // a channel that fails to load simply stays blank
        }
      }),
    );
    this.render();
  }

  async zoom(factor: number): Promise<void> {
    const s = this.state;
    if (!s.plotWindow || !s.meta) return;
    s.plotWindow = zoomWindow(s.plotWindow, s.t, factor, s.meta.duration);
    await this.refreshSeries();
  }

  async zoomReset(): Promise<void> {
    const s = this.state;
    if (!s.meta) return;
    s.plotWindow = { from: 0, to: s.meta.duration };
    await this.refreshSeries();
  }

  // -- scrubbing ------------------------------------------------------------

  scrubTo(xPx: number, widthPx: number): void {
    this.setTime(pixelToTime(xPx, widthPx, this.duration));
  }

  // -- event wiring -----------------------------------------------------------

  private wireEvents(): void {
    document.addEventListener("keydown", this.keydownListener);

    this.els.episodeSelect.addEventListener("change", () => {
      void this.selectEpisode(this.els.episodeSelect.value);
    });

    this.els.channelList.addEventListener("change", (ev) => {
      const input = ev.target as HTMLInputElement;
      if (input.classList.contains("channel-toggle") && input.dataset.channel) {
        void this.toggleChannel(input.dataset.channel, input.checked);
      }
    });

    this.els.controls.addEventListener("click", (ev) => {
      const btn = (ev.target as HTMLElement).closest<HTMLElement>("button.control");
      if (btn?.dataset.action) this.dispatch(btn.dataset.action as Action);
    });

    this.els.plots.addEventListener("click", (ev) => {
      const btn = (ev.target as HTMLElement).closest<HTMLElement>("button");
      if (!btn) return;
      if (btn.classList.contains("zoom-in")) void this.zoom(0.5);
      else if (btn.classList.contains("zoom-out")) void this.zoom(2);
      else if (btn.classList.contains("zoom-reset")) void this.zoomReset();
    });

    this.els.timeline.addEventListener("click", (ev) => {
      const rect = this.els.timeline.getBoundingClientRect();
      if (rect.width > 0) this.scrubTo(ev.clientX - rect.left, rect.width);
    });

    this.els.panelBody.addEventListener("click", (ev) => {
      const btn = (ev.target as HTMLElement).closest<HTMLElement>("button");
      if (!btn) return;
      const idx = Number(btn.dataset.idx);
      if (btn.classList.contains("edit-seg")) this.beginEdit(idx);
      else if (btn.classList.contains("delete-seg")) void this.deleteSegment(idx);
      else if (btn.classList.contains("save-edit")) void this.saveEdit();
      else if (btn.classList.contains("cancel-edit")) this.cancelEdit();
    });

    this.els.panelBody.addEventListener("input", (ev) => {
      const el = ev.target as HTMLInputElement | HTMLSelectElement;
      const draft = this.state.editing;
      if (!draft) return;
      if (el.classList.contains("edit-start")) draft.start = el.value;
      else if (el.classList.contains("edit-end")) draft.end = el.value;
      else if (el.classList.contains("edit-label")) draft.label = el.value;
      else if (el.classList.contains("edit-success")) draft.success = (el as HTMLInputElement).checked;
    });

    this.els.dialog.addEventListener("click", (ev) => {
      const s = this.state;
      if (!s.dialog) return;
      const opt = (ev.target as HTMLElement).closest<HTMLElement>("li.label-option");
      if (opt) {
        s.dialog.labelIndex = Number(opt.dataset.idx);
        this.render();
        return;
      }
      if ((ev.target as HTMLElement).closest("#dialog-success")) {
        s.dialog.success = !s.dialog.success;
        this.render();
      }
    });
  }
}

export async function boot(root: HTMLElement, client = new ApiClient()): Promise<App> {
  const app = new App(root, client);
  await app.start();
  return app;
}

// Auto-boot in a real page; tests call boot() themselves.
if (typeof document !== "undefined") {
  const mount = document.getElementById("app");
  if (mount && mount.dataset.autoboot === "on") {
    void boot(mount);
  }
}
