import { describe, expect, it } from "vitest";

import { HOLD_TAU_MS, HoldIntegrator } from "../src/control.js";

describe("HoldIntegrator", () => {
  it("rests at zero before any input", () => {
    const h = new HoldIntegrator();
    expect(h.valueAt(0)).toBe(0);
    expect(h.valueAt(5000)).toBe(0);
    expect(h.held).toBe(false);
  });

  it("rises to 1 - 1/e after one time constant of holding", () => {
    const h = new HoldIntegrator();
    h.press(0);
    expect(h.valueAt(HOLD_TAU_MS)).toBeCloseTo(1 - Math.exp(-1), 10);
  });

  it("is effectively saturated after five time constants", () => {
    const h = new HoldIntegrator();
    h.press(0);
    expect(h.valueAt(5 * HOLD_TAU_MS)).toBeGreaterThan(0.99);
  });

  it("decays with the same time constant on release", () => {
    const h = new HoldIntegrator();
    h.press(0);
    h.valueAt(10 * HOLD_TAU_MS); // ~1.0
    h.release(10 * HOLD_TAU_MS);
    const v = h.valueAt(11 * HOLD_TAU_MS);
    expect(v).toBeCloseTo(Math.exp(-1), 3);
    expect(h.held).toBe(false);
  });

  it("rises monotonically while held and stays in [0, 1]", () => {
    const h = new HoldIntegrator();
    h.press(0);
    let prev = 0;
    for (let ms = 10; ms <= 2000; ms += 10) {
      const v = h.valueAt(ms);
      expect(v).toBeGreaterThan(prev);
      expect(v).toBeLessThanOrEqual(1);
      prev = v;
    }
  });

  it("repeated press while held does not jump the value", () => {
    const h = new HoldIntegrator();
    h.press(0);
    const mid = h.valueAt(75);
    h.press(75); // key-repeat
    expect(h.valueAt(75)).toBeCloseTo(mid, 12);
  });

  it("ignores non-monotonic clocks instead of going backwards", () => {
    const h = new HoldIntegrator();
    h.press(100);
    const v = h.valueAt(250);
    expect(h.valueAt(200)).toBe(v);
  });

  it("rejects a non-positive time constant", () => {
    expect(() => new HoldIntegrator(0)).toThrow(RangeError);
  });
});
