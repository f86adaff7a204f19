/** End-to-end check against a real service instance.
 *
 * Boots the planning service on a synthetic workspace generated into a temp
 * directory, then drives the same client and store the browser uses through
 * the full loop: session creation, layer fetch, site selection, weight
 * update, and the staleness rule that protects the display from out-of-order
 * responses. Requires the Python package to be installed (python3 on PATH).
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { PlannerApi, type LayerGrid } from "../src/api";
import { valueAt } from "../src/heatmap";
import { PlannerStore } from "../src/store";

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address && typeof address === "object") {
        const { port } = address;
        probe.close(() => resolve(port));
      } else {
        probe.close(() => reject(new Error("no port assigned")));
      }
    });
  });
}

let workspace: string;
let child: ChildProcess | null = null;
let childLog = "";
let api: PlannerApi;
let store: PlannerStore;

beforeAll(async () => {
  workspace = mkdtempSync(join(tmpdir(), "vertiplan-ui-"));
  execFileSync(
    "python3",
    ["-m", "vertiplan.synthetic", "--out-dir", workspace, "--seed", "3", "--flights", "600"],
    { stdio: "pipe" },
  );

  const port = await freePort();
  child = spawn(
    "python3",
    [
      "-m",
      "vertiplan.cli",
      "--config",
      join(workspace, "config.json"),
      "serve",
      "--host",
      "127.0.0.1",
      "--port",
      String(port),
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  child.stdout?.on("data", (chunk: Buffer) => (childLog += chunk.toString()));
  child.stderr?.on("data", (chunk: Buffer) => (childLog += chunk.toString()));
  let exited = false;
  child.on("exit", () => (exited = true));

  api = new PlannerApi(`http://127.0.0.1:${port}`);
  const deadline = Date.now() + 150_000;
  for (;;) {
    if (exited) {
      throw new Error(`service exited during startup:\n${childLog}`);
    }
    try {
      const health = await api.health();
      expect(health.status).toBe("ok");
      break;
    } catch {
      if (Date.now() > deadline) {
        throw new Error(`service never became healthy:\n${childLog}`);
      }
      await sleep(500);
    }
  }
  store = new PlannerStore(api);
});

afterAll(async () => {
  if (child && child.exitCode === null) {
    const gone = new Promise<void>((resolve) => child!.once("exit", () => resolve()));
    child.kill("SIGTERM");
    await Promise.race([gone, sleep(10_000)]);
    if (child.exitCode === null) {
      child.kill("SIGKILL");
    }
  }
  if (workspace) {
    rmSync(workspace, { recursive: true, force: true });
  }
});

describe("live service round-trip", () => {
  it("creates a session whose layer and recommendations agree", async () => {
    await store.createSession();
    const session = store.session!;
    expect(session.version).toBe(0);
    expect(session.budget.used).toBe(0);
    expect(session.budget.total).toBeGreaterThan(1);
    expect(session.grid.rows).toBeGreaterThan(0);
    expect(session.grid.cols).toBeGreaterThan(0);
    expect(session.plan.cells).toEqual([]);
    expect(session.recommendations.length).toBeGreaterThan(0);

    const layer = store.layer!;
    expect(layer.layer).toBe("comprehensive");
    expect(layer.version).toBe(session.version);
    expect(layer.values).toHaveLength(session.grid.rows * session.grid.cols);
    expect(layer.values.every(Number.isFinite)).toBe(true);

    // the top recommendation is the argmax of the comprehensive surface
    const top = session.recommendations[0]!;
    expect(valueAt(layer, top.cell)).toBe(top.score);
    expect(Math.max(...layer.values)).toBe(top.score);
  });

  it("applies a selection: plan overlay, budget, and a fresh layer version", async () => {
    const top = store.session!.recommendations[0]!;
    await store.select(top.cell);

    const session = store.session!;
    expect(session.version).toBe(1);
    expect(session.budget.used).toBe(1);
    expect(session.plan.cells).toContainEqual([top.cell[0], top.cell[1], 1]);
    expect(session.recommendations.length).toBeGreaterThan(0);
    expect(store.layer!.version).toBe(1);
    expect(store.notice).toBeNull();
  });

  it("rejects a layer fetched before the latest mutation", async () => {
    const session = store.session!;
    const held: LayerGrid = await api.fetchLayer(session.id, "comprehensive");
    expect(held.version).toBe(1);

    const next = session.recommendations[0]!;
    await store.select(next.cell);
    expect(store.session!.version).toBe(2);
    expect(store.layer!.version).toBe(2);

    expect(store.presentLayer(held)).toBe(false);
    expect(store.layer!.version).toBe(2);
  });

  it("never sends out-of-bounds selections", async () => {
    const { rows } = store.session!.grid;
    const versionBefore = store.session!.version;
    await store.select([rows + 3, 0]);
    expect(store.session!.version).toBe(versionBefore);
    const serverView = await api.getSession(store.session!.id);
    expect(serverView.version).toBe(versionBefore);
    expect(serverView.budget.used).toBe(2);
  });

  it("round-trips a weight update and refreshes the display", async () => {
    const versionBefore = store.session!.version;
    await store.setWeights([0.5, 1, 1, -0.25]);
    expect(store.session!.weights).toEqual([0.5, 1, 1, -0.25]);
    expect(store.session!.version).toBe(versionBefore + 1);
    expect(store.layer!.version).toBe(store.session!.version);
    expect(store.notice).toBeNull();
  });

  it("serves every score layer at the session grid shape", async () => {
    const session = store.session!;
    for (const layer of ["demand", "coverage", "connectivity", "cost"] as const) {
      const grid = await api.fetchLayer(session.id, layer);
      expect(grid.layer).toBe(layer);
      expect(grid.values).toHaveLength(session.grid.rows * session.grid.cols);
      expect(grid.values.every(Number.isFinite)).toBe(true);
    }
  });
});
