// Client-side session state.  The websocket message handler is the only
// writer (single-threaded, event-driven); everything else reads.

import type { Frame, ServerMessage, SessionEnd } from "./protocol.js";

/** Two full waveform periods; bounds memory while showing the whole pattern. */
export const FRAME_CAPACITY = 1600;

export type ConnectionStatus = "idle" | "connecting" | "open" | "ended" | "error";
export type ControlMode = "slider" | "key_hold";

/** Conditions whose feedback channel is live (keys actually do something). */
export const FEEDBACK_CONDITIONS = new Set(["C+F", "F"]);
/** Conditions whose control channel is live (slider / key-hold forwarded). */
export const CONTROL_CONDITIONS = new Set(["C", "C+F"]);

export function acceptsFeedback(condition: string): boolean {
  return FEEDBACK_CONDITIONS.has(condition);
}

export function acceptsControl(condition: string): boolean {
  return CONTROL_CONDITIONS.has(condition);
}

/**
 * Fixed-capacity frame buffer, ordered by t.  Frames normally arrive in
 * order; anything stale or duplicated (reconnect races) is dropped so the
 * ordering invariant holds by construction.
 */
export class FrameBuffer {
  private frames: Frame[] = [];

  constructor(readonly capacity: number = FRAME_CAPACITY) {
    if (capacity < 1) throw new RangeError("capacity must be >= 1");
  }

  push(frame: Frame): boolean {
    const last = this.frames[this.frames.length - 1];
    if (last !== undefined && frame.t <= last.t) return false;
    this.frames.push(frame);
    if (this.frames.length > this.capacity) {
      this.frames.splice(0, this.frames.length - this.capacity);
    }
    return true;
  }

  get length(): number {
    return this.frames.length;
  }

  get latest(): Frame | undefined {
    return this.frames[this.frames.length - 1];
  }

  /** Read-only view; do not mutate. */
  all(): readonly Frame[] {
    return this.frames;
  }

  clear(): void {
    this.frames = [];
  }
}

export interface UiSessionState {
  connection: ConnectionStatus;
  condition: string;
  controlMode: ControlMode;
  frames: FrameBuffer;
  /** Acknowledged-and-applied feedback events, by sign. */
  rewards: number;
  punishments: number;
  /** Frames the server evicted for us (slow consumer), cumulative. */
  droppedFrames: number;
  lastAckNote: string | null;
  end: SessionEnd | null;
  error: string | null;
}

export function initialState(condition = "C+F"): UiSessionState {
  return {
    connection: "idle",
    condition,
    controlMode: "slider",
    frames: new FrameBuffer(),
    rewards: 0,
    punishments: 0,
    droppedFrames: 0,
    lastAckNote: null,
    end: null,
    error: null,
  };
}

/**
 * Fold one server message into the state.  Mutates in place (the buffer is
 * large and hot) and returns true when something visible changed.
 */
export function applyMessage(state: UiSessionState, msg: ServerMessage): boolean {
  switch (msg.type) {
    case "frame":
      return state.frames.push(msg);
    case "ack":
      state.lastAckNote = msg.note ?? null;
      if (!msg.applied) return true;
      if (msg.kind === "feedback_reward") state.rewards += 1;
      else if (msg.kind === "feedback_punish") state.punishments += 1;
      return true;
    case "frame_drop":
      state.droppedFrames += msg.count;
      return true;
    case "session_end":
      state.end = msg;
      state.connection = "ended";
      return true;
    case "error":
      state.error = typeof msg.error === "string" ? msg.error : "server error";
      state.connection = "error";
      return true;
  }
}
