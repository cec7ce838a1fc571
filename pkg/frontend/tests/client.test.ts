import { describe, expect, it } from "vitest";

import { streamUrl } from "../src/client.js";

describe("streamUrl", () => {
  it("swaps http for ws and keeps the path", () => {
    expect(streamUrl("http://127.0.0.1:8000", "/session/ab12/stream")).toBe(
      "ws://127.0.0.1:8000/session/ab12/stream",
    );
  });

  it("preserves TLS", () => {
    expect(streamUrl("https://bench.local", "/session/x/stream")).toBe(
      "wss://bench.local/session/x/stream",
    );
  });
});
