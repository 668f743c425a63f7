// Input sampling decoupled from rendering: the loop emits commands at their
// scheduled timestamps whenever pump() runs, so a stalled render (pump
// called late) produces a burst of correctly stamped commands instead of a
// lower rate. Keyboard fallback: arrows steer and accelerate, space brakes.

import { clamp, commandProblems, encodeCommand, type TeleopCommand } from "./messages.js";

export interface AxesSample {
  steering: number;
  throttle: number;
  brake: number;
  warning: string | null;
}

export interface AxesSource {
  sample(t_us: number): AxesSample;
}

export const NEUTRAL: AxesSample = Object.freeze(
  { steering: 0, throttle: 0, brake: 0, warning: null });

// -- keyboard -----------------------------------------------------------------

export interface KeyboardTuning {
  steerRatePerS: number;    // toward +/-1 while held
  steerReturnPerS: number;  // back toward 0 when released
  throttleRatePerS: number;
  throttleReturnPerS: number;
  brakeRatePerS: number;
}

export const DEFAULT_TUNING: KeyboardTuning = {
  steerRatePerS: 2.0,
  steerReturnPerS: 3.0,
  throttleRatePerS: 1.5,
  throttleReturnPerS: 3.0,
  brakeRatePerS: 5.0,
};

export class KeyboardAxes implements AxesSource {
  private held = new Set<string>();
  private steering = 0;
  private throttle = 0;
  private brake = 0;
  private lastT_us: number | null = null;

  constructor(private tuning: KeyboardTuning = DEFAULT_TUNING) {}

  keyEvent(code: string, down: boolean): void {
    if (down) this.held.add(code);
    else this.held.delete(code);
  }

  sample(t_us: number): AxesSample {
    const dt = this.lastT_us === null ? 0 : (t_us - this.lastT_us) / 1e6;
    this.lastT_us = t_us;
    const t = this.tuning;

    const steerDir = (this.held.has("ArrowRight") ? 1 : 0)
      - (this.held.has("ArrowLeft") ? 1 : 0);
    if (steerDir !== 0) {
      this.steering = clamp(this.steering + steerDir * t.steerRatePerS * dt, -1, 1);
    } else if (this.steering !== 0) {
      const back = t.steerReturnPerS * dt;
      this.steering = Math.abs(this.steering) <= back
        ? 0 : this.steering - Math.sign(this.steering) * back;
    }

    if (this.held.has("ArrowUp")) {
      this.throttle = clamp(this.throttle + t.throttleRatePerS * dt, 0, 1);
    } else {
      this.throttle = clamp(this.throttle - t.throttleReturnPerS * dt, 0, 1);
    }

    this.brake = this.held.has("Space")
      ? clamp(this.brake + t.brakeRatePerS * dt, 0, 1)
      : 0;

    return { steering: this.steering, throttle: this.throttle,
             brake: this.brake, warning: null };
  }
}

// -- gamepad ------------------------------------------------------------------

export interface GamepadReader {
  read(): { steer: number; throttle: number; brake: number } | null;
}

export class BrowserGamepadReader implements GamepadReader {
  constructor(private deadzone = 0.08) {}

  read() {
    const pads = typeof navigator !== "undefined" && navigator.getGamepads
      ? navigator.getGamepads() : [];
    const gp = Array.from(pads ?? []).find(Boolean);
    if (!gp) return null;
    const steer = gp.axes?.[0] ?? 0;
    return {
      steer: Math.abs(steer) < this.deadzone ? 0 : steer,
      throttle: gp.buttons?.[7]?.value ?? 0,
      brake: gp.buttons?.[6]?.value ?? 0,
    };
  }
}

// Gamepad when present, keyboard otherwise; device loss mid-session falls
// back to the keyboard (or neutral) with an on-screen warning.
export class CombinedAxes implements AxesSource {
  private hadGamepad = false;

  constructor(private keyboard: KeyboardAxes,
              private gamepad: GamepadReader) {}

  sample(t_us: number): AxesSample {
    const pad = this.gamepad.read();
    const keys = this.keyboard.sample(t_us);
    if (pad) {
      this.hadGamepad = true;
      return {
        steering: clamp(pad.steer, -1, 1),
        throttle: clamp(pad.throttle, 0, 1),
        brake: clamp(pad.brake, 0, 1),
        warning: null,
      };
    }
    return this.hadGamepad
      ? { ...keys, warning: "gamepad lost - keyboard fallback" }
      : keys;
  }
}

// -- loop ---------------------------------------------------------------------

export class InputLoop {
  private seq = 0;
  private nextDue_us = 0;
  private periodUs: number;
  rejected = 0;

  constructor(private axes: AxesSource,
              private sink: (encoded: string, cmd: TeleopCommand) => void,
              rateHz = 100,
              private onWarning: (w: string | null) => void = () => {}) {
    this.periodUs = Math.round(1e6 / rateHz);
  }

  get emitted(): number {
    return this.seq;
  }

  // Emit every command due at or before now. Commands carry their scheduled
  // timestamps, so the emitted stream is a pure function of the input-event
  // history and the pump times' coarse envelope.
  pump(now_us: number): void {
    while (this.nextDue_us <= now_us) {
      const t = this.nextDue_us;
      const a = this.axes.sample(t);
      this.onWarning(a.warning);
      const cmd: TeleopCommand = {
        kind: "command",
        seq: this.seq + 1,
        ts_us: t,
        steering: clamp(a.steering, -1, 1),
        throttle: clamp(a.throttle, 0, 1),
        brake: clamp(a.brake, 0, 1),
      };
      if (commandProblems(cmd).length) {
        this.rejected += 1;   // defensive: clamp above makes this unreachable
      } else {
        this.seq += 1;
        this.sink(encodeCommand(cmd), cmd);
      }
      this.nextDue_us += this.periodUs;
    }
  }
}
