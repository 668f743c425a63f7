// Wire format shared with the bridge: one JSON object per WebSocket frame.
// Commands must satisfy the same invariants the bridge enforces; anything
// out of range is rejected before it ever reaches the socket.

export interface TeleopCommand {
  kind: "command";
  seq: number;
  ts_us: number;
  steering: number;
  throttle: number;
  brake: number;
}

export interface Telemetry {
  kind: "telemetry";
  seq: number;
  ts_us: number;
  speed_mps: number;
  steering_pos: number;
  echo_ts_us: number;
  echo_seq: number;
  // pose annotation added by the bridge for the top-down view
  x_m?: number;
  y_m?: number;
  heading_rad?: number;
}

export interface MetricBlock {
  n: number;
  mean_us: number;
  std_us: number;
  min_us: number;
  max_us: number;
  p50_us: number;
  p95_us: number;
  p99_us: number;
}

export interface SummarySnapshot {
  kind: "summary";
  t_us: number;
  rtt: MetricBlock | null;
  g2g: MetricBlock | null;
  speed_mps: number;
  counters: Record<string, number>;
}

export interface FrameMeta {
  kind: "frame-meta";
  frame_id: number;
  event_us: number;
  display_us: number;
  g2g_us: number;
}

export interface Hello {
  kind: "hello";
  name: string;
  wheelbase_m: number;
  max_steer_rad: number;
  max_speed_mps: number;
  rate_hz: number;
  cmd_timeout_us: number;
}

export type Inbound = Telemetry | SummarySnapshot | FrameMeta | Hello;

export function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

export function commandProblems(cmd: TeleopCommand): string[] {
  const out: string[] = [];
  if (!Number.isInteger(cmd.seq) || cmd.seq < 1) out.push("seq must be >= 1");
  if (!Number.isInteger(cmd.ts_us)) out.push("ts_us must be an integer");
  if (!(cmd.steering >= -1 && cmd.steering <= 1)) out.push("steering out of [-1, 1]");
  if (!(cmd.throttle >= 0 && cmd.throttle <= 1)) out.push("throttle out of [0, 1]");
  if (!(cmd.brake >= 0 && cmd.brake <= 1)) out.push("brake out of [0, 1]");
  return out;
}

// Fixed key order so identical commands serialize to identical bytes.
export function encodeCommand(cmd: TeleopCommand): string {
  const problems = commandProblems(cmd);
  if (problems.length) {
    throw new Error(`invalid command: ${problems.join("; ")}`);
  }
  return JSON.stringify({
    kind: "command",
    seq: cmd.seq,
    ts_us: cmd.ts_us,
    steering: cmd.steering,
    throttle: cmd.throttle,
    brake: cmd.brake,
  });
}

export function parseInbound(raw: string): Inbound | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const kind = (obj as { kind?: unknown }).kind;
  if (kind === "telemetry" || kind === "summary" || kind === "frame-meta"
      || kind === "hello") {
    return obj as Inbound;
  }
  return null;
}
