// Wire types for the live session service.  One JSON object per websocket
// message in both directions; servers discriminate on `type`, client events
// on `kind`.  Keep this file in sync with the service by hand -- it is the
// whole contract.

export interface Frame {
  type: "frame";
  t: number;
  theta_target: number;
  theta_left: number;
  emg: number;
  mu: number;
  sigma: number;
  r_mdp: number;
  h: number;
  r_total: number;
  running_mae: number;
  total_feedback: number;
}

export interface Ack {
  type: "ack";
  kind: string;
  applied: boolean;
  t?: number;
  client_time?: number;
  note?: string;
  value?: number;
}

export interface FrameDrop {
  type: "frame_drop";
  count: number;
}

export interface SessionEnd {
  type: "session_end";
  status: string;
  steps_completed: number;
  truncated: boolean;
}

export interface ServerError {
  type: "error";
  error?: string;
  [key: string]: unknown;
}

export type ServerMessage = Frame | Ack | FrameDrop | SessionEnd | ServerError;

export type FeedbackKind = "feedback_reward" | "feedback_punish";

export interface FeedbackEventOut {
  kind: FeedbackKind;
  client_time: number;
}

export interface ControlEventOut {
  kind: "control_value";
  value: number;
  client_time: number;
}

export type ClientEvent = FeedbackEventOut | ControlEventOut;

/** Response body of POST /session. */
export interface SessionInfo {
  session_id: string;
  condition: string;
  tick_ms: number;
  total_steps: number;
  stream_path: string;
}

const SERVER_TYPES = new Set([
  "frame",
  "ack",
  "frame_drop",
  "session_end",
  "error",
]);

/**
 * Parse one websocket payload.  Returns null for anything that is not a
 * JSON object with a known `type` -- callers drop those rather than crash
 * mid-session on a protocol addition.
 */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const type = (data as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) return null;
  return data as ServerMessage;
}

export function feedbackEvent(kind: FeedbackKind, now = Date.now()): FeedbackEventOut {
  return { kind, client_time: now };
}

export function controlEvent(value: number, now = Date.now()): ControlEventOut {
  // The service clamps too, but an honest client never sends out-of-range.
  const clamped = Math.min(1, Math.max(0, value));
  return { kind: "control_value", value: clamped, client_time: now };
}
