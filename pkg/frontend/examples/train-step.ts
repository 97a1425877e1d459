/**
 * One training step of an external per-pixel model driven by service
 * gradients.
 *
 * The model lives entirely in this script (logistic regression on
 * intensity + bias); the service only supplies the loss value and
 * d(loss)/dp. Runs against CALF_SERVER if set, otherwise boots a local
 * service. Exits 0 when the step lowers the loss.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { setTimeout as sleep } from "node:timers/promises";

import { CalfClient, calf_loss, isFailure } from "../src/index.js";

const WIDTH = 16;
const HEIGHT = 16;
const SIZE = WIDTH * HEIGHT;

async function waitForHealth(url: string, attempts = 100): Promise<void> {
  for (let i = 0; i < attempts; i += 1) {
    try {
      const resp = await fetch(`${url}/api/v1/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await sleep(150);
  }
  throw new Error(`service at ${url} never became healthy`);
}

async function startLocalService(): Promise<{ url: string; proc: ChildProcess }> {
  const port = 21000 + Math.floor(Math.random() * 19000);
  const proc = spawn(
    "python3",
    ["-m", "uvicorn", "calf.service.app:app", "--host", "127.0.0.1",
     `--port`, String(port), "--log-level", "warning"],
    { stdio: ["ignore", "ignore", "inherit"] },
  );
  const url = `http://127.0.0.1:${port}`;
  await waitForHealth(url);
  return { url, proc };
}

function sigmoid(z: number): number {
  return z >= 0 ? 1 / (1 + Math.exp(-z)) : Math.exp(z) / (1 + Math.exp(z));
}

function buildScene(): { intensity: Float64Array; mask: Float64Array } {
  // bright 6x6 square on a dim background
  const intensity = new Float64Array(SIZE);
  const mask = new Float64Array(SIZE);
  for (let row = 0; row < HEIGHT; row += 1) {
    for (let col = 0; col < WIDTH; col += 1) {
      const i = row * WIDTH + col;
      const inside = row >= 5 && row < 11 && col >= 5 && col < 11;
      mask[i] = inside ? 1 : 0;
      intensity[i] = (inside ? 0.75 : 0.3) + 0.05 * Math.sin(i * 12.9898);
    }
  }
  return { intensity, mask };
}

function predict(intensity: Float64Array, w: number, b: number): Float64Array {
  const p = new Float64Array(SIZE);
  for (let i = 0; i < SIZE; i += 1) {
    p[i] = sigmoid(w * intensity[i] + b);
  }
  return p;
}

async function main(): Promise<number> {
  let proc: ChildProcess | undefined;
  let url = process.env.CALF_SERVER;
  if (!url) {
    const started = await startLocalService();
    url = started.url;
    proc = started.proc;
  }
  try {
    const client = new CalfClient(url);
    const { intensity, mask } = buildScene();
    const shape = { width: WIDTH, height: HEIGHT };
    let w = 0.5;
    let b = -0.1;
    const lr = 5.0;

    const before = await calf_loss("bce_dice", predict(intensity, w, b), mask, shape,
      { wantGradient: true }, client);
    if (isFailure(before) || before.gradient === null) {
      throw new Error(`loss call failed: ${JSON.stringify(before)}`);
    }

    // chain rule through the local sigmoid: dL/dz = dL/dp * p(1-p)
    const p = predict(intensity, w, b);
    let gradW = 0;
    let gradB = 0;
    for (let i = 0; i < SIZE; i += 1) {
      const dz = before.gradient[i] * p[i] * (1 - p[i]);
      gradW += dz * intensity[i];
      gradB += dz;
    }
    w -= lr * gradW;
    b -= lr * gradB;

    const after = await calf_loss("bce_dice", predict(intensity, w, b), mask, shape, {}, client);
    if (isFailure(after)) {
      throw new Error(`loss call failed: ${JSON.stringify(after)}`);
    }

    console.log(`loss before step: ${before.value.toFixed(6)}`);
    console.log(`loss after step:  ${after.value.toFixed(6)}`);
    console.log(`weights: w=${w.toFixed(4)} b=${b.toFixed(4)}`);
    if (!(after.value < before.value)) {
      console.error("gradient step did not reduce the loss");
      return 1;
    }
    console.log("ok: one gradient step reduced the loss");
    return 0;
  } finally {
    proc?.kill();
  }
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);
