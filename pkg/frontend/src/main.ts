// Session page wiring: condition picker, start/end, control slider or
// key-hold, reward/punish keys, and the live trace canvas.  The websocket
// message handler is the only writer to the session state; DOM handlers
// only emit ClientEvents (or adjust local input widgets).

import { endSession, openStream, sendEvent, startSession } from "./client.js";
import { HoldIntegrator } from "./control.js";
import { draw } from "./chart.js";
import { controlEvent, feedbackEvent } from "./protocol.js";
import type { SessionInfo } from "./protocol.js";
import {
  acceptsControl,
  acceptsFeedback,
  applyMessage,
  initialState,
  type ControlMode,
  type UiSessionState,
} from "./state.js";

// Two adjacent keys for single-hand feedback; hold space to drive the
// control channel in key-hold mode.  Override via ?reward=…&punish=…&hold=…
const params = new URLSearchParams(location.search);
const KEYS = {
  reward: params.get("reward") ?? "j",
  punish: params.get("punish") ?? "k",
  hold: params.get("hold") ?? " ",
};

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing #${id}`);
  return el as T;
};

const conditionSel = $<HTMLSelectElement>("condition");
const startBtn = $<HTMLButtonElement>("start");
const endBtn = $<HTMLButtonElement>("end");
const modeSel = $<HTMLSelectElement>("control-mode");
const slider = $<HTMLInputElement>("control-slider");
const rewardBtn = $<HTMLButtonElement>("reward-btn");
const punishBtn = $<HTMLButtonElement>("punish-btn");
const statusEl = $<HTMLSpanElement>("status");
const noteEl = $<HTMLSpanElement>("note");
const countersEl = $<HTMLSpanElement>("counters");
const metricsEl = $<HTMLSpanElement>("metrics");
const canvas = $<HTMLCanvasElement>("chart");
const ctx = canvas.getContext("2d")!;

let state: UiSessionState = initialState(conditionSel.value);
let session: SessionInfo | null = null;
let socket: WebSocket | null = null;
let controlTimer: number | null = null;
const hold = new HoldIntegrator();
let dirty = true;

rewardBtn.textContent = `reward (${KEYS.reward})`;
punishBtn.textContent = `punish (${KEYS.punish})`;

function controlValue(now: number): number {
  return state.controlMode === "key_hold" ? hold.valueAt(now) : Number(slider.value);
}

function applyGates(): void {
  const condition = session !== null ? session.condition : conditionSel.value;
  const live = socket !== null && state.connection === "open";
  const fb = acceptsFeedback(condition);
  const ctl = acceptsControl(condition);
  rewardBtn.disabled = !fb || !live;
  punishBtn.disabled = !fb || !live;
  slider.disabled = !ctl || state.controlMode !== "slider";
  modeSel.disabled = !ctl;
  startBtn.disabled = session !== null;
  endBtn.disabled = session === null;
  conditionSel.disabled = session !== null;
}

function pressFeedback(kind: "feedback_reward" | "feedback_punish"): void {
  const condition = session !== null ? session.condition : conditionSel.value;
  if (socket === null || !acceptsFeedback(condition)) return;
  sendEvent(socket, feedbackEvent(kind));
}

function onMessage(msg: Parameters<typeof applyMessage>[1]): void {
  if (applyMessage(state, msg)) dirty = true;
  if (msg.type === "session_end") teardown(`session ${msg.status}`);
}

function teardown(reason: string): void {
  if (controlTimer !== null) {
    clearInterval(controlTimer);
    controlTimer = null;
  }
  if (socket !== null && socket.readyState <= WebSocket.OPEN) socket.close();
  socket = null;
  session = null;
  statusEl.textContent = reason;
  applyGates();
  dirty = true;
}

async function start(): Promise<void> {
  state = initialState(conditionSel.value);
  state.controlMode = modeSel.value as ControlMode;
  state.connection = "connecting";
  statusEl.textContent = "starting…";
  applyGates();
  try {
    const body: Record<string, unknown> = { condition: conditionSel.value };
    const token = params.get("token");
    if (token !== null) body.auth_token = token;
    session = await startSession(location.origin, body);
  } catch (err) {
    statusEl.textContent = String(err instanceof Error ? err.message : err);
    state.connection = "error";
    applyGates();
    return;
  }
  const info = session;
  socket = openStream(location.origin, info, onMessage, () => {
    if (state.connection === "open") state.connection = "ended";
    dirty = true;
  });
  socket.onopen = () => {
    state.connection = "open";
    statusEl.textContent = `${info.condition} session ${info.session_id}`;
    if (acceptsControl(info.condition)) {
      controlTimer = window.setInterval(() => {
        if (socket !== null) {
          sendEvent(socket, controlEvent(controlValue(performance.now())));
        }
      }, info.tick_ms);
    }
    applyGates();
  };
  dirty = true;
}

async function end(): Promise<void> {
  if (session === null) return;
  const id = session.session_id;
  try {
    const result = await endSession(location.origin, id);
    const mae = (result.summary as { mae_last_5k?: number | null } | null)?.mae_last_5k;
    statusEl.textContent =
      `ended: ${result.status}, ${result.steps_completed} steps` +
      (typeof mae === "number" ? `, mae ${mae.toFixed(4)}` : "");
  } catch (err) {
    statusEl.textContent = String(err instanceof Error ? err.message : err);
  }
  teardown(statusEl.textContent ?? "ended");
}

startBtn.addEventListener("click", () => void start());
endBtn.addEventListener("click", () => void end());
conditionSel.addEventListener("change", applyGates);
modeSel.addEventListener("change", () => {
  state.controlMode = modeSel.value as ControlMode;
  applyGates();
});
rewardBtn.addEventListener("click", () => pressFeedback("feedback_reward"));
punishBtn.addEventListener("click", () => pressFeedback("feedback_punish"));

window.addEventListener("keydown", (ev) => {
  if (ev.repeat || ev.target instanceof HTMLInputElement) return;
  if (ev.key === KEYS.reward) pressFeedback("feedback_reward");
  else if (ev.key === KEYS.punish) pressFeedback("feedback_punish");
  else if (ev.key === KEYS.hold && state.controlMode === "key_hold") {
    hold.press(performance.now());
    ev.preventDefault();
  }
});
window.addEventListener("keyup", (ev) => {
  if (ev.key === KEYS.hold) hold.release(performance.now());
});

function redraw(): void {
  if (dirty) {
    dirty = false;
    const dpr = window.devicePixelRatio || 1;
    const w = canvas.clientWidth;
    const h = canvas.clientHeight;
    if (canvas.width !== w * dpr || canvas.height !== h * dpr) {
      canvas.width = w * dpr;
      canvas.height = h * dpr;
    }
    ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
    draw(ctx, state.frames.all(), w, h);

    const f = state.frames.latest;
    countersEl.textContent = `+${state.rewards} / −${state.punishments}`;
    metricsEl.textContent =
      f === undefined
        ? "—"
        : `t=${f.t}  mae=${f.running_mae.toFixed(4)}  σ=${f.sigma.toFixed(3)}` +
          (state.droppedFrames > 0 ? `  dropped=${state.droppedFrames}` : "");
    noteEl.textContent = state.lastAckNote ?? "";
  }
  requestAnimationFrame(redraw);
}

applyGates();
requestAnimationFrame(redraw);
