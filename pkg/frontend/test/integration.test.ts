/**
 * Live round trip against a desk-scale inference service: trains a tiny
 * checkpoint through the CLI, starts the HTTP service, and drives it
 * with the same client code the editor uses.
 */

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { EditorSession } from "../src/editor.js";
import { allowedBrushes } from "../src/labelGrid.js";

function pythonAvailable(): boolean {
  try {
    execFileSync("python3", ["-c", "import echogen"], { stdio: "ignore", timeout: 60_000 });
    return true;
  } catch {
    return false;
  }
}

const HAVE_SERVICE = pythonAvailable();
const PORT = 8791;
const BASE_URL = `http://127.0.0.1:${PORT}`;

const TINY_CONFIG = `train:
  batch_size: 2
  total_iterations: 2
  checkpoint_interval: 2
  seed: 3
model:
  image_size: 128
  gen_base_channels: 8
  disc_base_channels: 8
`;

describe.skipIf(!HAVE_SERVICE)("live service round trip", () => {
  let workdir: string;
  let server: ChildProcess | null = null;

  beforeAll(async () => {
    workdir = mkdtempSync(join(tmpdir(), "maskstudio-"));
    const data = join(workdir, "data");
    const run = join(workdir, "run");
    const cfg = join(workdir, "cfg.yaml");
    writeFileSync(cfg, TINY_CONFIG);
    const cli = (...args: string[]) =>
      execFileSync("python3", ["-m", "echogen.cli", ...args], { stdio: "ignore", timeout: 300_000 });
    cli("fixtures", "--out", data, "--count", "4", "--seed", "2", "--size", "128");
    cli("split", "--data", data, "--test-count", "1");
    cli("train", "--config", cfg, "--experiment", "e", "--data", data, "--out", run);

    server = spawn(
      "python3",
      ["-m", "echogen.cli", "serve", "--port", String(PORT), "--checkpoint", join(run, "checkpoint_final.pt")],
      { stdio: "ignore" },
    );
    const client = new ServiceClient(BASE_URL);
    const deadline = Date.now() + 60_000;
    for (;;) {
      try {
        await client.health();
        break;
      } catch {
        if (Date.now() > deadline) throw new Error("service did not come up");
        await new Promise((resolve) => setTimeout(resolve, 500));
      }
    }
  }, 400_000);

  afterAll(() => {
    server?.kill();
    if (workdir) rmSync(workdir, { recursive: true, force: true });
  });

  it("lists models and gates brushes from live metadata", async () => {
    const session = new EditorSession(new ServiceClient(BASE_URL));
    const models = await session.loadModels();
    expect(models.length).toBe(1);
    expect(models[0].condition_name).toBe("e");
    expect(models[0].input_size).toBe(128);
    expect(session.activeBrushes()).toEqual(allowedBrushes(models[0].condition_labels));
    expect(session.activeBrushes()).toEqual([1, 2, 3]);
  });

  it("submits a painted canvas and displays a deterministic image", async () => {
    const responses: string[] = [];
    const session = new EditorSession(new ServiceClient(BASE_URL), {
      onResponse: (r) => responses.push(r.imagePngB64),
    });
    await session.loadModels();
    session.grid.paint(
      [
        { x: 100, y: 80 },
        { x: 120, y: 110 },
        { x: 110, y: 140 },
      ],
      1,
      18,
    );
    session.grid.paint([{ x: 110, y: 190 }], 3, 14);

    const first = await session.submit();
    expect(first).not.toBeNull();
    expect(first!.imagePngB64.length).toBeGreaterThan(100);
    expect(first!.latencyMs).toBeGreaterThan(0);

    const second = await session.submit();
    expect(second!.imagePngB64).toBe(first!.imagePngB64); // backend determinism, surfaced
    expect(responses).toEqual([first!.imagePngB64, second!.imagePngB64]);
  }, 120_000);
});
