import { describe, expect, it } from "vitest";

import { commandProblems, encodeCommand, parseInbound,
         type TeleopCommand } from "../src/messages.js";

const base: TeleopCommand = {
  kind: "command", seq: 1, ts_us: 0, steering: 0, throttle: 0, brake: 0,
};

describe("command encoding", () => {
  it("serializes with fixed key order and all fields", () => {
    expect(encodeCommand(base)).toBe(
      '{"kind":"command","seq":1,"ts_us":0,"steering":0,"throttle":0,"brake":0}');
  });

  it("is byte-deterministic", () => {
    const cmd = { ...base, seq: 9, ts_us: 123, steering: -0.25, throttle: 0.5 };
    expect(encodeCommand(cmd)).toBe(encodeCommand(cmd));
  });

  it("rejects out-of-range fields", () => {
    expect(commandProblems({ ...base, steering: 1.5 })).toHaveLength(1);
    expect(commandProblems({ ...base, throttle: -0.1 })).toHaveLength(1);
    expect(commandProblems({ ...base, seq: 0 })).toHaveLength(1);
    expect(() => encodeCommand({ ...base, brake: 2 })).toThrow(/brake/);
  });

  it("rejects NaN steering", () => {
    expect(commandProblems({ ...base, steering: Number.NaN })).toHaveLength(1);
  });
});

describe("inbound parsing", () => {
  it("accepts the bridge kinds", () => {
    const t = parseInbound('{"kind":"telemetry","seq":1,"ts_us":0,'
      + '"speed_mps":1.5,"steering_pos":0.1,"echo_ts_us":0,"echo_seq":0}');
    expect(t?.kind).toBe("telemetry");
    expect(parseInbound('{"kind":"summary","t_us":1,"rtt":null,"g2g":null,'
      + '"speed_mps":0,"counters":{}}')?.kind).toBe("summary");
    expect(parseInbound('{"kind":"frame-meta","frame_id":1,"event_us":0,'
      + '"display_us":9,"g2g_us":9}')?.kind).toBe("frame-meta");
  });

  it("returns null for garbage and unknown kinds", () => {
    expect(parseInbound("not json")).toBeNull();
    expect(parseInbound('"string"')).toBeNull();
    expect(parseInbound('{"kind":"mystery"}')).toBeNull();
  });
});
