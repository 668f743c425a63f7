// End-to-end: a scripted WebSocket client drives the live bridge and the
// resulting steering-lag estimate must match the headless run of the same
// scenario within one resampling grid step. Requires the python package
// (`pip install -e ..`) on PATH as python3.

import { spawn, spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { describe, expect, it } from "vitest";
import WebSocket from "ws";

import { CockpitState } from "../src/state.js";

const REPO = resolve(__dirname, "..", "..");

const havePython = spawnSync("python3", ["-c", "import teleopsim"],
                             { cwd: REPO }).status === 0;

const CHANNELS = {
  uplink: { base_delay_us: 25_000, ordered: true },
  downlink: { base_delay_us: 25_000, ordered: true },
};
const VEHICLE = { telemetry_period_us: 10_000, tau_steer_s: 0.2 };

function freePort(): Promise<number> {
  return new Promise((done, fail) => {
    const srv = createServer();
    srv.on("error", fail);
    srv.listen(0, "127.0.0.1", () => {
      const port = (srv.address() as { port: number }).port;
      srv.close(() => done(port));
    });
  });
}

function runPython(args: string[]): Promise<{ code: number; out: string }> {
  return new Promise((done) => {
    const proc = spawn("python3", ["-m", "teleopsim", ...args], { cwd: REPO });
    let out = "";
    proc.stdout.on("data", (d) => { out += d; });
    proc.stderr.on("data", (d) => { out += d; });
    proc.on("close", (code) => done({ code: code ?? -1, out }));
  });
}

describe.skipIf(!havePython)("cockpit end-to-end", () => {
  it("scripted sine reproduces the headless lag within one grid step",
     { timeout: 90_000 }, async () => {
    const work = mkdtempSync(join(tmpdir(), "teleopsim-e2e-"));

    // Headless twin of the session (virtual clock, scripted operator).
    const headlessPath = join(work, "headless.yaml");
    writeFileSync(headlessPath, JSON.stringify({
      name: "e2e-headless", seed: 3, duration_s: 12.0, mode: "virtual",
      vehicle: VEHICLE, ...CHANNELS,
      operator: { kind: "sine", rate_hz: 100.0, amplitude: 0.5,
                  freq_hz: 0.2, throttle: 0.2 },
      outputs: join(work, "headless-out"),
    }));
    const headless = await runPython(["run", headlessPath]);
    expect(headless.code, headless.out).toBe(0);
    const headlessReport = JSON.parse(
      readFileSync(join(work, "headless-out", "report.json"), "utf-8"));
    expect(headlessReport.steering_lag).not.toBeNull();

    // Live bridge session.
    const livePath = join(work, "live.yaml");
    writeFileSync(livePath, JSON.stringify({
      name: "e2e-live", seed: 3, duration_s: 13.5, mode: "realtime",
      vehicle: VEHICLE, ...CHANNELS,
      operator: { kind: "sine", rate_hz: 100.0 },
      outputs: join(work, "live-out"),
    }));
    const port = await freePort();
    const server = spawn("python3",
      ["-m", "teleopsim", "serve", livePath, "--port", String(port)],
      { cwd: REPO });
    let serverOut = "";
    server.stdout.on("data", (d) => { serverOut += d; });
    server.stderr.on("data", (d) => { serverOut += d; });
    await new Promise<void>((ready, fail) => {
      const probe = setInterval(() => {
        if (serverOut.includes("serving")) { clearInterval(probe); ready(); }
      }, 50);
      server.on("close", () => fail(new Error(`serve died:\n${serverOut}`)));
      setTimeout(() => { clearInterval(probe); ready(); }, 5_000);
    });

    const state = new CockpitState();
    const sent = { n: 0 };
    const sessionS = 12.5;

    await new Promise<void>((finish, fail) => {
      const ws = new WebSocket(`ws://127.0.0.1:${port}`);
      ws.on("error", fail);
      ws.on("message", (data) => state.applyRaw(String(data), Date.now() * 1000));
      ws.on("open", () => {
        const t0 = Date.now();
        // 100Hz scripted operator: a 40ms-shifted 0.2Hz sine.
        const timer = setInterval(() => {
          const tS = (Date.now() - t0) / 1000;
          if (tS >= sessionS) {
            clearInterval(timer);
            ws.close();
            finish();
            return;
          }
          const due = Math.floor(tS * 100);
          while (sent.n <= due) {
            sent.n += 1;
            const stamp = Math.round(tS * 1e6);
            ws.send(JSON.stringify({
              kind: "command", seq: sent.n, ts_us: stamp,
              steering: 0.5 * Math.sin(2 * Math.PI * 0.2 * (tS - 0.040)),
              throttle: 0.2, brake: 0,
            }));
          }
        }, 4);
      });
    });

    // command emission held at 100Hz within 10%
    const achievedHz = sent.n / sessionS;
    expect(achievedHz).toBeGreaterThan(90);
    expect(achievedHz).toBeLessThan(110);

    // overlay blind distance is exactly summary.speed x summary g2g mean
    expect(state.summary).not.toBeNull();
    if (state.summary?.g2g) {
      expect(state.blindDistanceM()).toBe(
        state.summary.speed_mps * (state.summary.g2g.mean_us / 1e6));
    }
    expect(state.hasTelemetry()).toBe(true);

    const exitCode = await new Promise<number>((done) =>
      server.on("close", (code) => done(code ?? -1)));
    expect(exitCode, serverOut).toBe(0);

    const liveReport = JSON.parse(
      readFileSync(join(work, "live-out", "report.json"), "utf-8"));
    expect(liveReport.steering_lag, serverOut).not.toBeNull();
    const grid = Math.max(liveReport.steering_lag.grid_us,
                          headlessReport.steering_lag.grid_us);
    expect(Math.abs(liveReport.steering_lag.lag_us
                    - headlessReport.steering_lag.lag_us))
      .toBeLessThanOrEqual(grid);
  });
});
