// Cockpit state: everything the render loop draws comes from here, and all
// mutation happens through applyMessage / markConnection / input warnings.
// Overlay numbers are the bridge's rolling summaries verbatim - the client
// never recomputes statistics from raw samples.

import type { FrameMeta, Hello, Inbound, SummarySnapshot, Telemetry } from "./messages.js";
import { parseInbound } from "./messages.js";

export const STALE_AFTER_US = 500_000; // matches the vehicle failsafe timeout

export type Connection = "connecting" | "open" | "closed";

export class CockpitState {
  connection: Connection = "connecting";
  hello: Hello | null = null;
  telemetry: Telemetry | null = null;
  lastTelemetryAt_us: number | null = null;
  summary: SummarySnapshot | null = null;
  lastFrame: FrameMeta | null = null;
  framesSeen = 0;
  malformedInbound = 0;
  inputWarning: string | null = null;

  applyRaw(raw: string, now_us: number): Inbound | null {
    const msg = parseInbound(raw);
    if (msg === null) {
      this.malformedInbound += 1;
      return null;
    }
    this.apply(msg, now_us);
    return msg;
  }

  apply(msg: Inbound, now_us: number): void {
    switch (msg.kind) {
      case "hello":
        this.hello = msg;
        break;
      case "telemetry":
        this.telemetry = msg;
        this.lastTelemetryAt_us = now_us;
        break;
      case "summary":
        this.summary = msg;
        break;
      case "frame-meta":
        this.lastFrame = msg;
        this.framesSeen += 1;
        break;
    }
  }

  markConnection(connection: Connection): void {
    this.connection = connection;
  }

  hasTelemetry(): boolean {
    return this.telemetry !== null;
  }

  isStale(now_us: number): boolean {
    return this.lastTelemetryAt_us !== null
      && now_us - this.lastTelemetryAt_us > STALE_AFTER_US;
  }

  // Blind distance: bridge-reported speed times bridge-reported mean G2G,
  // exactly as the summary carries them.
  blindDistanceM(): number | null {
    const s = this.summary;
    if (!s || !s.g2g) return null;
    return s.speed_mps * (s.g2g.mean_us / 1e6);
  }
}
