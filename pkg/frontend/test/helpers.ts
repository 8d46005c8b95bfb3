/** Shared setup for app-level tests: fake gateway + booted app. */

import { ApiClient } from "../src/api.js";
import { App, boot } from "../src/app.js";
import { GwOptions, MockGateway } from "./mock_gateway.js";

export interface TestApp {
  app: App;
  gw: MockGateway;
  root: HTMLElement;
}

export async function bootApp(opts: GwOptions = {}): Promise<TestApp> {
  document.body.innerHTML = `<div id="test-root"></div>`;
  const root = document.getElementById("test-root") as HTMLElement;
  const gw = new MockGateway(opts);
  gw.install();
  const app = await boot(root, new ApiClient());
  await flush();
  return { app, gw, root };
}

export function teardown(t: TestApp): void {
  t.app.destroy();
  t.gw.uninstall();
  document.body.innerHTML = "";
}

/** Drain pending microtasks so awaited fetch chains finish. */
export async function flush(rounds = 12): Promise<void> {
  for (let i = 0; i < rounds; i++) await Promise.resolve();
}

export function pressKey(key: string, target: EventTarget = document): KeyboardEvent {
  const ev = new KeyboardEvent("keydown", { key, bubbles: true, cancelable: true });
  target.dispatchEvent(ev);
  return ev;
}

export async function pressKeys(...keys: string[]): Promise<void> {
  for (const key of keys) {
    pressKey(key);
    await flush();
  }
}

export function q<T extends HTMLElement>(root: HTMLElement, sel: string): T {
  const el = root.querySelector<T>(sel);
  if (!el) throw new Error(`expected element ${sel}`);
  return el;
}

export function qa(root: HTMLElement, sel: string): HTMLElement[] {
  return [...root.querySelectorAll<HTMLElement>(sel)];
}

/** A promise with its resolver exposed, for gating mock responses. */
export function deferred(): { promise: Promise<void>; resolve: () => void } {
  let resolve!: () => void;
  const promise = new Promise<void>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}
