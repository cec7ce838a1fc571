// Thin HTTP + websocket glue to the live service.  All learning-state
// mutation flows through sendEvent(); everything else is read-only.

import type { ClientEvent, ServerMessage, SessionInfo } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";

export function streamUrl(httpOrigin: string, streamPath: string): string {
  return httpOrigin.replace(/^http/, "ws") + streamPath;
}

export async function startSession(
  origin: string,
  body: Record<string, unknown>,
): Promise<SessionInfo> {
  const resp = await fetch(`${origin}/session`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  const data = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const detail = (data as { detail?: unknown }).detail;
    throw new Error(
      typeof detail === "string" ? detail : `POST /session failed (${resp.status})`,
    );
  }
  return data as SessionInfo;
}

export async function endSession(
  origin: string,
  sessionId: string,
): Promise<Record<string, unknown>> {
  const resp = await fetch(`${origin}/session/${sessionId}`, { method: "DELETE" });
  if (!resp.ok) throw new Error(`DELETE /session failed (${resp.status})`);
  return (await resp.json()) as Record<string, unknown>;
}

export function openStream(
  origin: string,
  info: SessionInfo,
  onMessage: (msg: ServerMessage) => void,
  onClose: () => void,
): WebSocket {
  const ws = new WebSocket(streamUrl(origin, info.stream_path));
  ws.onmessage = (ev) => {
    const msg = parseServerMessage(String(ev.data));
    if (msg !== null) onMessage(msg);
  };
  ws.onclose = onClose;
  return ws;
}

export function sendEvent(ws: WebSocket, event: ClientEvent): boolean {
  if (ws.readyState !== WebSocket.OPEN) return false;
  ws.send(JSON.stringify(event));
  return true;
}
