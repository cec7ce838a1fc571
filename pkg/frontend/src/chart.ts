// Canvas trace rendering: target angle, learner angle, EMG, and a feedback
// lane with tick marks.  Layout math is kept pure (and unit-tested); only
// draw() touches the canvas.

import type { Frame } from "./protocol.js";

export interface Point {
  t: number;
  v: number;
}

/**
 * Split a series into polyline segments, breaking wherever consecutive
 * frames are not adjacent in t.  Dropped frames show up as gaps, never as
 * interpolated lines.
 */
export function segments(
  frames: readonly Frame[],
  value: (f: Frame) => number,
): Point[][] {
  const out: Point[][] = [];
  let current: Point[] = [];
  let prevT: number | null = null;
  for (const f of frames) {
    if (prevT !== null && f.t !== prevT + 1 && current.length > 0) {
      out.push(current);
      current = [];
    }
    current.push({ t: f.t, v: value(f) });
    prevT = f.t;
  }
  if (current.length > 0) out.push(current);
  return out;
}

export interface FeedbackTick {
  t: number;
  positive: boolean;
}

/**
 * Feedback events, recovered from the cumulative counter: a step where
 * total_feedback increases carries an event whose sign is the sign of the
 * freshly-replaced shaping value h.
 */
export function feedbackTicks(frames: readonly Frame[]): FeedbackTick[] {
  const ticks: FeedbackTick[] = [];
  for (let i = 1; i < frames.length; i++) {
    if (frames[i].total_feedback > frames[i - 1].total_feedback) {
      ticks.push({ t: frames[i].t, positive: frames[i].h >= 0 });
    }
  }
  return ticks;
}

/** y = offset + scale * x mapping of [d0, d1] onto [r0, r1]. */
export class LinearScale {
  private readonly k: number;
  private readonly b: number;

  constructor(d0: number, d1: number, r0: number, r1: number) {
    const span = d1 - d0;
    this.k = span === 0 ? 0 : (r1 - r0) / span;
    this.b = r0 - d0 * this.k;
  }

  map(x: number): number {
    return this.b + this.k * x;
  }
}

export function angleRange(frames: readonly Frame[]): [number, number] {
  if (frames.length === 0) return [0, 1.6];
  let lo = Infinity;
  let hi = -Infinity;
  for (const f of frames) {
    lo = Math.min(lo, f.theta_target, f.theta_left);
    hi = Math.max(hi, f.theta_target, f.theta_left);
  }
  const pad = Math.max(0.05, (hi - lo) * 0.05);
  return [lo - pad, hi + pad];
}

const COLORS = {
  target: "#3366cc",   // the target joint trace is conventionally blue
  learner: "#dd6611",
  emg: "#2a9d5c",
  reward: "#2a9d5c",
  punish: "#cc3344",
  axis: "#889",
  label: "#556",
};

interface Lane {
  y0: number;
  y1: number;
  label: string;
}

function lanes(height: number): { angle: Lane; emg: Lane; feedback: Lane } {
  const gap = 8;
  const fbH = Math.max(24, height * 0.12);
  const emgH = Math.max(40, height * 0.22);
  const angleH = height - fbH - emgH - 2 * gap;
  return {
    angle: { y0: 0, y1: angleH, label: "angle (rad)" },
    emg: { y0: angleH + gap, y1: angleH + gap + emgH, label: "emg" },
    feedback: { y0: height - fbH, y1: height, label: "feedback" },
  };
}

export function draw(
  ctx: CanvasRenderingContext2D,
  frames: readonly Frame[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const left = 46;
  const plotW = width - left - 8;
  const { angle, emg, feedback } = lanes(height);

  ctx.strokeStyle = COLORS.axis;
  ctx.fillStyle = COLORS.label;
  ctx.font = "11px sans-serif";
  ctx.lineWidth = 1;
  for (const lane of [angle, emg, feedback]) {
    ctx.strokeRect(left + 0.5, lane.y0 + 0.5, plotW - 1, lane.y1 - lane.y0 - 1);
    ctx.save();
    ctx.translate(12, (lane.y0 + lane.y1) / 2);
    ctx.rotate(-Math.PI / 2);
    ctx.textAlign = "center";
    ctx.fillText(lane.label, 0, 0);
    ctx.restore();
  }
  ctx.textAlign = "right";
  ctx.fillText("t", width - 10, height - 4);
  if (frames.length === 0) return;

  const t0 = frames[0].t;
  const t1 = Math.max(frames[frames.length - 1].t, t0 + 1);
  const x = new LinearScale(t0, t1, left + 1, left + plotW - 1);
  const [aLo, aHi] = angleRange(frames);
  const ay = new LinearScale(aLo, aHi, angle.y1 - 2, angle.y0 + 2);
  const ey = new LinearScale(0, 1, emg.y1 - 2, emg.y0 + 2);

  const stroke = (segs: Point[][], scale: LinearScale, color: string) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.4;
    for (const seg of segs) {
      ctx.beginPath();
      seg.forEach((p, i) => {
        const px = x.map(p.t);
        const py = scale.map(p.v);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }
  };

  stroke(segments(frames, (f) => f.theta_target), ay, COLORS.target);
  stroke(segments(frames, (f) => f.theta_left), ay, COLORS.learner);
  stroke(segments(frames, (f) => f.emg), ey, COLORS.emg);

  const mid = (feedback.y0 + feedback.y1) / 2;
  const tickH = (feedback.y1 - feedback.y0) / 2 - 3;
  ctx.lineWidth = 1.6;
  for (const tick of feedbackTicks(frames)) {
    const px = x.map(tick.t);
    ctx.strokeStyle = tick.positive ? COLORS.reward : COLORS.punish;
    ctx.beginPath();
    ctx.moveTo(px, mid);
    ctx.lineTo(px, tick.positive ? mid - tickH : mid + tickH);
    ctx.stroke();
  }
  ctx.strokeStyle = COLORS.axis;
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(left + 1, mid + 0.5);
  ctx.lineTo(left + plotW - 1, mid + 0.5);
  ctx.stroke();
}
