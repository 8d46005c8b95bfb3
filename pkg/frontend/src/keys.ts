/** Keyboard dispatch driven entirely by the gateway's shortcut map.
 *
 * The config maps action names to key strings (one key per action, keys
 * pre-lowercased by the service). The app never hardcodes a key; it
 * resolves the pressed key against that map and acts on the bound action.
 * Unbound keys fall through untouched so the browser keeps its own
 * behaviour for them.
 */

export type Action =
  | "toggle_segment"
  | "play_pause"
  | "step_forward_fast"
  | "step_backward_fast"
  | "step_forward_slow"
  | "step_backward_slow"
  | "cancel_pending";

export const ACTION_LABELS: Record<Action, string> = {
  toggle_segment: "Start/Stop segment",
  play_pause: "Play/Pause",
  step_forward_fast: "Fast forward",
  step_backward_fast: "Fast back",
  step_forward_slow: "Step forward",
  step_backward_slow: "Step back",
  cancel_pending: "Cancel pending",
};

/** Normalize a KeyboardEvent.key the same way the config parser does.
 * The space bar reports " ", but configs name it "space". */
export function normalizeKey(key: string): string {
  if (key === " " || key === "Spacebar") return "space";
  return key.toLowerCase();
}

/** Key currently bound to an action, for display on the buttons. */
export function keyForAction(shortcuts: Record<string, string>, action: Action): string | null {
  return shortcuts[action] ?? null;
}

export function resolveAction(shortcuts: Record<string, string>, key: string): Action | null {
  const pressed = normalizeKey(key);
  for (const [action, bound] of Object.entries(shortcuts)) {
    if (bound === pressed) return action as Action;
  }
  return null;
}
