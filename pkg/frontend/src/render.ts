// Top-down scene + dashboard drawing. The drawing surface is the minimal
// subset of CanvasRenderingContext2D the cockpit needs, so tests can pass a
// recording fake instead of a real canvas.

import type { CockpitState } from "./state.js";

export interface Surface {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(rad: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

const PX_PER_M = 12;

export function fmtMs(us: number): string {
  return `${(us / 1000).toFixed(1)} ms`;
}

export function overlayLines(state: CockpitState, now_us: number): string[] {
  const lines: string[] = [];
  const s = state.summary;
  if (s?.rtt) {
    lines.push(`RTT ${fmtMs(s.rtt.mean_us)} ± ${fmtMs(s.rtt.std_us)} (n=${s.rtt.n})`);
  } else {
    lines.push("RTT --");
  }
  if (s?.g2g) {
    lines.push(`G2G ${fmtMs(s.g2g.mean_us)} (n=${s.g2g.n})`);
  } else {
    lines.push("G2G --");
  }
  const blind = state.blindDistanceM();
  lines.push(blind === null ? "blind distance --"
                            : `blind distance ${blind.toFixed(2)} m`);
  const t = state.telemetry;
  if (t) {
    lines.push(`speed ${(t.speed_mps * 3.6).toFixed(1)} km/h  `
      + `steer ${t.steering_pos.toFixed(2)}`);
  }
  return lines;
}

export function banner(state: CockpitState, now_us: number): string | null {
  if (state.connection !== "open") return "disconnected";
  if (!state.hasTelemetry()) return "awaiting vehicle";
  if (state.isStale(now_us)) return "stale data - vehicle signal lost";
  return null;
}

export function draw(ctx: Surface, state: CockpitState, w: number, h: number,
                     now_us: number): void {
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, w, h);

  const t = state.telemetry;
  const cx = w / 2;
  const cy = h * 0.55;

  // ground grid scrolls under a camera fixed on the vehicle
  ctx.strokeStyle = "#1f2a33";
  ctx.lineWidth = 1;
  const x0 = t?.x_m ?? 0;
  const y0 = t?.y_m ?? 0;
  const grid = 5 * PX_PER_M;
  const offX = ((-x0 * PX_PER_M) % grid + grid) % grid;
  const offY = ((y0 * PX_PER_M) % grid + grid) % grid;
  for (let gx = offX; gx <= w; gx += grid) {
    ctx.beginPath(); ctx.moveTo(gx, 0); ctx.lineTo(gx, h); ctx.stroke();
  }
  for (let gy = offY; gy <= h; gy += grid) {
    ctx.beginPath(); ctx.moveTo(0, gy); ctx.lineTo(w, gy); ctx.stroke();
  }

  if (t) {
    ctx.save();
    ctx.translate(cx, cy);
    ctx.rotate(-(t.heading_rad ?? 0));
    const len = 4.2 * PX_PER_M;
    const wid = 1.9 * PX_PER_M;
    ctx.fillStyle = "#3f9b6f";
    ctx.fillRect(-len / 2, -wid / 2, len, wid);
    ctx.fillStyle = "#cfe8db";
    ctx.fillRect(len / 2 - 6, -wid / 2, 6, wid); // nose marker
    // front-wheel steering indicator
    const steer = t.steering_pos * (state.hello?.max_steer_rad ?? 0.6);
    ctx.save();
    ctx.translate(len / 2 - 10, 0);
    ctx.rotate(-steer);
    ctx.strokeStyle = "#e8e2cf";
    ctx.lineWidth = 3;
    ctx.beginPath(); ctx.moveTo(-8, 0); ctx.lineTo(8, 0); ctx.stroke();
    ctx.restore();
    ctx.restore();
  }

  // dashboard overlays
  ctx.font = "14px monospace";
  ctx.fillStyle = "#d7e0e8";
  let y = 22;
  for (const line of overlayLines(state, now_us)) {
    ctx.fillText(line, 12, y);
    y += 18;
  }
  if (state.inputWarning) {
    ctx.fillStyle = "#e0b040";
    ctx.fillText(state.inputWarning, 12, y + 6);
  }

  const note = banner(state, now_us);
  if (note) {
    ctx.fillStyle = "#b33";
    ctx.fillRect(0, h / 2 - 22, w, 44);
    ctx.fillStyle = "#fff";
    ctx.font = "18px monospace";
    ctx.fillText(note, cx - note.length * 5, h / 2 + 6);
  }
}
