import { describe, expect, it } from "vitest";

import {
  controlEvent,
  feedbackEvent,
  parseServerMessage,
} from "../src/protocol.js";

describe("parseServerMessage", () => {
  it("round-trips a frame", () => {
    const frame = {
      type: "frame",
      t: 41,
      theta_target: 1.5446,
      theta_left: 1.52,
      emg: 0.97,
      mu: 0.02,
      sigma: 0.8,
      r_mdp: 1.0,
      h: 0.0,
      r_total: 1.0,
      running_mae: 0.21,
      total_feedback: 3,
    };
    expect(parseServerMessage(JSON.stringify(frame))).toEqual(frame);
  });

  it("keeps ack fields including the gating note", () => {
    const msg = parseServerMessage(
      '{"type": "ack", "kind": "feedback_reward", "applied": false, "note": "feedback is ignored in condition C"}',
    );
    expect(msg).not.toBeNull();
    expect(msg!.type).toBe("ack");
    if (msg!.type === "ack") {
      expect(msg!.applied).toBe(false);
      expect(msg!.note).toContain("condition C");
    }
  });

  it.each([
    ["not json at all", "{nope"],
    ["a bare number", "42"],
    ["null", "null"],
    ["an array", "[1,2]"],
    ["missing type", '{"t": 3}'],
    ["unknown type", '{"type": "telemetry_v2"}'],
  ])("returns null for %s", (_label, raw) => {
    expect(parseServerMessage(raw)).toBeNull();
  });
});

describe("client events", () => {
  it("builds feedback events with the caller's clock", () => {
    expect(feedbackEvent("feedback_punish", 1234)).toEqual({
      kind: "feedback_punish",
      client_time: 1234,
    });
  });

  it("passes in-range control values through", () => {
    expect(controlEvent(0.5, 7).value).toBe(0.5);
    expect(controlEvent(0, 7).value).toBe(0);
    expect(controlEvent(1, 7).value).toBe(1);
  });

  it("clamps control values to [0, 1] before they hit the wire", () => {
    expect(controlEvent(1.2, 7).value).toBe(1);
    expect(controlEvent(-0.3, 7).value).toBe(0);
  });
});
