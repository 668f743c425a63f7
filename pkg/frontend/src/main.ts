// Cockpit entry point: wires keyboard/gamepad input, the WebSocket link and
// the canvas render loop together. Input pumping runs on a fine timer so a
// slow render frame never lowers the command rate.

import { BrowserGamepadReader, CombinedAxes, InputLoop, KeyboardAxes } from "./input.js";
import { configFromQuery, connect } from "./net.js";
import { draw, type Surface } from "./render.js";
import { CockpitState } from "./state.js";

const config = configFromQuery(location.search);
const state = new CockpitState();

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d") as unknown as Surface;

const t0 = performance.now();
const nowUs = () => Math.round((performance.now() - t0) * 1000);

const keyboard = new KeyboardAxes();
window.addEventListener("keydown", (ev) => {
  if (["ArrowLeft", "ArrowRight", "ArrowUp", "ArrowDown", "Space"].includes(ev.code)) {
    ev.preventDefault();
    keyboard.keyEvent(ev.code, true);
  }
});
window.addEventListener("keyup", (ev) => keyboard.keyEvent(ev.code, false));

const axes = new CombinedAxes(keyboard, new BrowserGamepadReader());

let socket: WebSocket | null = null;
const loop = new InputLoop(
  axes,
  (encoded) => {
    if (socket && socket.readyState === WebSocket.OPEN) socket.send(encoded);
  },
  config.rateHz,
  (warning) => { state.inputWarning = warning; },
);

socket = connect(config, {
  onOpen: () => state.markConnection("open"),
  onMessage: (raw) => state.applyRaw(raw, nowUs()),
  onClose: () => state.markConnection("closed"),
});

setInterval(() => loop.pump(nowUs()), 4);

function frame(): void {
  const dpr = window.devicePixelRatio || 1;
  const w = canvas.clientWidth;
  const h = canvas.clientHeight;
  if (canvas.width !== w * dpr || canvas.height !== h * dpr) {
    canvas.width = w * dpr;
    canvas.height = h * dpr;
    (ctx as unknown as CanvasRenderingContext2D)
      .setTransform(dpr, 0, 0, dpr, 0, 0);
  }
  draw(ctx, state, w, h, nowUs());
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
