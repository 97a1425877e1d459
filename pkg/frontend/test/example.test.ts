import { execFile } from "node:child_process";
import { promisify } from "node:util";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { startService, type RunningService } from "./service.js";

const run = promisify(execFile);

let service: RunningService;

beforeAll(async () => {
  service = await startService();
}, 30_000);

afterAll(() => {
  service?.stop();
});

describe("worked example", () => {
  it("train-step script runs end to end and exits 0", async () => {
    await run("npx", ["tsc", "-p", "tsconfig.json"], {
      cwd: new URL("..", import.meta.url).pathname,
    });
    const { stdout } = await run(
      "node",
      ["dist/examples/train-step.js"],
      {
        cwd: new URL("..", import.meta.url).pathname,
        env: { ...process.env, CALF_SERVER: service.url },
      },
    );
    expect(stdout).toContain("reduced the loss");
  }, 120_000);
});
