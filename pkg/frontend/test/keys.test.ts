import { afterEach, describe, expect, it, vi } from "vitest";

import { keyForAction, normalizeKey, resolveAction } from "../src/keys.js";
import { clampTime, pixelToTime, stepTime } from "../src/state.js";
import { TestApp, bootApp, flush, pressKey, pressKeys, q, teardown } from "./helpers.js";

let t: TestApp | null = null;

afterEach(() => {
  vi.useRealTimers();
  if (t) teardown(t);
  t = null;
});

describe("key resolution", () => {
  it("normalizes names the way the config does", () => {
    expect(normalizeKey("ArrowRight")).toBe("arrowright");
    expect(normalizeKey("Enter")).toBe("enter");
    expect(normalizeKey(" ")).toBe("space");
    expect(normalizeKey(".")).toBe(".");
  });

  it("resolves only configured keys", () => {
    const map = { toggle_segment: "k" };
    expect(resolveAction(map, "K")).toBe("toggle_segment");
    expect(resolveAction(map, "Enter")).toBeNull();
    expect(keyForAction(map, "toggle_segment")).toBe("k");
    expect(keyForAction(map, "play_pause")).toBeNull();
  });
});

describe("time arithmetic", () => {
  it("clamps into the episode", () => {
    expect(clampTime(-1, 10)).toBe(0);
    expect(clampTime(11, 10)).toBe(10);
    expect(clampTime(3.5, 10)).toBe(3.5);
  });

  it("steps stay inside [0, duration]", () => {
    expect(stepTime(0, -1, 10)).toBe(0);
    expect(stepTime(9.95, 1, 10)).toBe(10);
    expect(stepTime(2, 0.1, 10)).toBeCloseTo(2.1, 12);
  });

  it("maps pixels to time linearly with clamping", () => {
    expect(pixelToTime(0, 600, 10)).toBe(0);
    expect(pixelToTime(300, 600, 10)).toBe(5);
    expect(pixelToTime(600, 600, 10)).toBe(10);
    expect(pixelToTime(900, 600, 10)).toBe(10);
    expect(pixelToTime(-5, 600, 10)).toBe(0);
    expect(pixelToTime(10, 0, 10)).toBe(0);
  });
});

describe("keyboard navigation", () => {
  it("moves by the configured fast and slow steps", async () => {
    t = await bootApp({ navFast: 2.0, navSlow: 0.25 });
    await pressKeys("ArrowRight");
    expect(t.app.state.t).toBe(2.0);
    await pressKeys(".");
    expect(t.app.state.t).toBe(2.25);
    await pressKeys(",");
    expect(t.app.state.t).toBe(2.0);
    await pressKeys("ArrowLeft");
    expect(t.app.state.t).toBe(0);
  });

  it("stays at zero when stepping back from the start", async () => {
    t = await bootApp();
    await pressKeys("ArrowLeft", "ArrowLeft", ",");
    expect(t.app.state.t).toBe(0);
  });

  it("ignores unbound keys and does not swallow them", async () => {
    t = await bootApp();
    const before = t.app.state.t;
    const ev = pressKey("x");
    await flush();
    expect(t.app.state.t).toBe(before);
    expect(t.app.state.pendingStart).toBeNull();
    expect(ev.defaultPrevented).toBe(false);
  });

  it("consumes bound keys", async () => {
    t = await bootApp();
    const ev = pressKey("ArrowRight");
    await flush();
    expect(ev.defaultPrevented).toBe(true);
  });

  it("honours a remapped shortcut table", async () => {
    t = await bootApp({
      shortcuts: { toggle_segment: "k", step_forward_fast: "l", step_backward_fast: "h", cancel_pending: "q" },
    });
    // the defaults mean nothing under this remap
    await pressKeys("Enter", "ArrowRight");
    expect(t.app.state.t).toBe(0);
    expect(t.app.state.pendingStart).toBeNull();

    await pressKeys("l", "l");
    expect(t.app.state.t).toBe(2);
    await pressKeys("k");
    expect(t.app.state.pendingStart).toBe(2);
    await pressKeys("q");
    expect(t.app.state.pendingStart).toBeNull();
  });

  it("does not fire shortcuts while typing in a field", async () => {
    t = await bootApp({ initialRecord: { segments: [{ start: 1, end: 2, label: "grasp", success: true }] } });
    q(t.root, "button.edit-seg").click();
    await flush();
    const input = q<HTMLInputElement>(t.root, "input.edit-start");
    pressKey("ArrowRight", input);
    await flush();
    expect(t.app.state.t).toBe(0);
  });
});

describe("segment marking", () => {
  it("marks a start, then opens the dialog on the closing toggle", async () => {
    t = await bootApp();
    await pressKeys("ArrowRight", "Enter");
    expect(t.app.state.pendingStart).toBe(1);
    expect(q(t.root, "#label-dialog").hidden).toBe(true);

    await pressKeys("ArrowRight", "ArrowRight", "Enter");
    const dlg = t.app.state.dialog;
    expect(dlg).not.toBeNull();
    expect(dlg!.start).toBe(1);
    expect(dlg!.end).toBe(3);
    expect(q(t.root, "#label-dialog").hidden).toBe(false);
  });

  it("normalizes a backwards marking", async () => {
    t = await bootApp();
    await pressKeys("ArrowRight", "ArrowRight", "ArrowRight", "Enter", "ArrowLeft", "ArrowLeft", "Enter");
    expect(t.app.state.dialog).toEqual({ start: 1, end: 3, labelIndex: 0, success: true });
  });

  it("refuses a zero-length segment but keeps the mark", async () => {
    t = await bootApp();
    await pressKeys("ArrowRight", "Enter", "Enter");
    expect(t.app.state.dialog).toBeNull();
    expect(t.app.state.pendingStart).toBe(1);
    expect(q(t.root, "#error-banner").textContent).toContain("nonzero");
  });

  it("cancels a pending mark with the cancel key", async () => {
    t = await bootApp();
    await pressKeys("ArrowRight", "Enter");
    expect(t.app.state.pendingStart).toBe(1);
    await pressKeys("Escape");
    expect(t.app.state.pendingStart).toBeNull();
    expect(t.root.querySelector("#pending-overlay")).toBeNull();
  });
});

describe("playback", () => {
  it("plays, advances the clock, and pauses", async () => {
    vi.useFakeTimers();
    t = await bootApp({ fps: 10 });
    await pressKeys(" ");
    expect(t.app.state.playing).toBe(true);

    await vi.advanceTimersByTimeAsync(500);
    expect(t.app.state.t).toBeCloseTo(0.5, 6);

    await pressKeys(" ");
    expect(t.app.state.playing).toBe(false);
    const frozen = t.app.state.t;
    await vi.advanceTimersByTimeAsync(300);
    expect(t.app.state.t).toBe(frozen);
  });

  it("stops at the end of the episode", async () => {
    vi.useFakeTimers();
    t = await bootApp({ fps: 10, duration: 1.0 });
    await pressKeys(" ");
    await vi.advanceTimersByTimeAsync(2500);
    expect(t.app.state.t).toBe(1.0);
    expect(t.app.state.playing).toBe(false);
  });
});
