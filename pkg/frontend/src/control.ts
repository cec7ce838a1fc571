// Key-hold control: holding the key drives the channel toward 1, releasing
// lets it relax toward 0, each with a 150 ms exponential time constant --
// the same smoothing the service documents for its display path, so what
// the trainer sees is what the learner gets.

export const HOLD_TAU_MS = 150;

export class HoldIntegrator {
  private value = 0;
  private target = 0;
  private lastMs: number | null = null;

  constructor(readonly tauMs: number = HOLD_TAU_MS) {
    if (!(tauMs > 0)) throw new RangeError("tauMs must be positive");
  }

  press(nowMs: number): void {
    this.advance(nowMs);
    this.target = 1;
  }

  release(nowMs: number): void {
    this.advance(nowMs);
    this.target = 0;
  }

  get held(): boolean {
    return this.target === 1;
  }

  /** Current channel value, advancing the exponential to `nowMs` first. */
  valueAt(nowMs: number): number {
    this.advance(nowMs);
    return this.value;
  }

  private advance(nowMs: number): void {
    if (this.lastMs !== null && nowMs > this.lastMs) {
      const decay = Math.exp(-(nowMs - this.lastMs) / this.tauMs);
      this.value = this.target + (this.value - this.target) * decay;
    }
    this.lastMs = nowMs;
  }
}
